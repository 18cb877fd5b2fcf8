//! Draw censored data from a known AFT model, for tests and calibration checks.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::SurvivalDataset;
use super::family::Family;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub family: Family,
    pub intercept: f64,
    /// Coefficients on independent standard normal covariates `x1, x2, ...`.
    pub coefficients: Vec<f64>,
    pub sigma: f64,
    /// Exact share of rows that end up censored.
    pub censor_fraction: f64,
}

/// `n` rows of `ln T = mu + theta . x + sigma W`. Censoring times follow the
/// same model with an independent error and a shift chosen so that exactly
/// `round(censor_fraction * n)` rows are censored.
pub fn simulate_aft(sim: &Simulation, n: usize, seed: u64) -> Result<SurvivalDataset> {
    if !(0.0..1.0).contains(&sim.censor_fraction) {
        return Err(Error::InvalidArgument(format!(
            "censor fraction must be in [0, 1), got {}",
            sim.censor_fraction
        )));
    }
    if !(sim.sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {}", sim.sigma)));
    }
    let p = sim.coefficients.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| Family::LogNormal.sample(&mut rng));
    let mut log_t = Vec::with_capacity(n);
    let mut gap = Vec::with_capacity(n);
    for row in x.rows() {
        let eta = sim.intercept + row.iter().zip(&sim.coefficients).map(|(a, b)| a * b).sum::<f64>();
        let w = sim.family.sample(&mut rng);
        let v = sim.family.sample(&mut rng);
        log_t.push(eta + sim.sigma * w);
        // censored iff shift < gap
        gap.push(sim.sigma * (w - v));
    }
    let k = (sim.censor_fraction * n as f64).round() as usize;
    let shift = if k == 0 {
        f64::INFINITY
    } else {
        let mut sorted = gap.clone();
        sorted.sort_by(f64::total_cmp);
        let cut = n - k;
        if cut == 0 {
            sorted[0] - 1.0
        } else {
            0.5 * (sorted[cut - 1] + sorted[cut])
        }
    };
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    for i in 0..n {
        let censored = gap[i] > shift;
        let lt = if censored { log_t[i] - gap[i] + shift } else { log_t[i] };
        times.push(lt.exp());
        events.push(!censored);
    }
    let schema = (1..=p).map(|j| format!("x{j}")).collect();
    SurvivalDataset::new(schema, times, events, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn censoring_share_is_exact() {
        let sim = Simulation {
            family: Family::Weibull,
            intercept: 0.0,
            coefficients: vec![0.5, -0.3],
            sigma: 0.7,
            censor_fraction: 0.2,
        };
        let d = simulate_aft(&sim, 2000, 1).unwrap();
        assert_eq!(d.len() - d.n_events(), 400);
        assert_eq!(d.schema(), ["x1".to_string(), "x2".to_string()]);
    }

    #[test]
    fn no_censoring_keeps_every_event() {
        let sim = Simulation {
            family: Family::LogNormal,
            intercept: 1.0,
            coefficients: vec![],
            sigma: 1.0,
            censor_fraction: 0.0,
        };
        let d = simulate_aft(&sim, 100, 1).unwrap();
        assert_eq!(d.n_events(), 100);
    }
}
