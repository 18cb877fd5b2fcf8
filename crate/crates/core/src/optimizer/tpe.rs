//! Tree-structured Parzen estimator over independent per-parameter densities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pareto::split_by_dominance;
use super::space::{Domain, ParamSpec, SearchSpace};
use crate::survival::family::normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TpeConfig {
    /// Uniform random suggestions until the history has this many entries.
    pub n_startup: usize,
    /// Share of the history treated as good.
    pub gamma: f64,
    /// Candidates drawn from the good density per suggestion.
    pub n_candidates: usize,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            n_startup: 128,
            gamma: 0.25,
            n_candidates: 24,
        }
    }
}

/// One evaluated point with its minimize-all objective vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub point: Vec<f64>,
    pub objectives: Vec<f64>,
}

/// Next point to evaluate. Deterministic in `(history, seed)`; always inside
/// `space`.
pub fn suggest(history: &[Observation], space: &SearchSpace, seed: u64, cfg: &TpeConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let usable: Vec<&Observation> = history
        .iter()
        .filter(|o| o.point.len() == space.len() && o.objectives.iter().all(|v| v.is_finite()))
        .collect();
    if usable.len() < cfg.n_startup.max(1) {
        return space.sample_uniform(&mut rng);
    }

    let objectives: Vec<Vec<f64>> = usable.iter().map(|o| o.objectives.clone()).collect();
    let (good, bad) = split_by_dominance(&objectives, cfg.gamma);
    let column = |idx: &[usize], d: usize| idx.iter().map(|&i| usable[i].point[d]).collect::<Vec<_>>();
    let densities: Vec<(Density, Density)> = space
        .params
        .iter()
        .enumerate()
        .map(|(d, spec)| (Density::new(spec, &column(&good, d)), Density::new(spec, &column(&bad, d))))
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..cfg.n_candidates.max(1) {
        let mut score = 0.0;
        let mut point = Vec::with_capacity(space.len());
        for (spec, (l, g)) in space.params.iter().zip(&densities) {
            let u = l.sample(&mut rng);
            score += l.log_pdf(u) - g.log_pdf(u);
            point.push(spec.from_internal(u));
        }
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, point));
        }
    }
    best.expect("at least one candidate").1
}

/// Evaluate `objective` for `n_trials` suggestions, feeding each result back.
pub fn minimize(
    space: &SearchSpace,
    n_trials: usize,
    cfg: &TpeConfig,
    seed: u64,
    mut objective: impl FnMut(&[f64]) -> Vec<f64>,
) -> Vec<Observation> {
    let mut history = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let point = suggest(&history, space, super::trial_seed(seed, i as u64), cfg);
        let objectives = objective(&point);
        history.push(Observation { point, objectives });
    }
    history
}

/// A Parzen density in the internal coordinate of one parameter, mixed with
/// a uniform prior of weight `1 / (n + 1)`.
enum Density {
    Numeric {
        lo: f64,
        hi: f64,
        centers: Vec<f64>,
        bandwidth: f64,
    },
    Categorical {
        /// Probability of each choice index.
        mass: Vec<f64>,
    },
}

impl Density {
    fn new(spec: &ParamSpec, values: &[f64]) -> Self {
        match &spec.domain {
            Domain::Categorical { choices } => {
                let k = choices.len() as f64;
                let n = values.len() as f64;
                let mass = choices
                    .iter()
                    .map(|c| (values.iter().filter(|v| *v == c).count() as f64 + 1.0 / k) / (n + 1.0))
                    .collect();
                Density::Categorical { mass }
            }
            _ => {
                let (lo, hi) = spec.internal_bounds().expect("numeric domain");
                let range = hi - lo;
                let centers: Vec<f64> = values.iter().map(|v| spec.to_internal(*v).clamp(lo, hi)).collect();
                let n = centers.len() as f64;
                let bandwidth = if centers.len() >= 2 {
                    let mean = centers.iter().sum::<f64>() / n;
                    let sd = (centers.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                    if sd > 0.0 {
                        1.06 * sd * n.powf(-0.2)
                    } else {
                        range / 10.0
                    }
                } else {
                    range / 10.0
                };
                Density::Numeric {
                    lo,
                    hi,
                    centers,
                    bandwidth: bandwidth.clamp(range / 100.0, range),
                }
            }
        }
    }

    /// A draw in the internal coordinate; categorical draws are choice indices.
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Density::Categorical { mass } => {
                let mut u: f64 = rng.random();
                for (i, m) in mass.iter().enumerate() {
                    if u < *m {
                        return i as f64;
                    }
                    u -= m;
                }
                (mass.len() - 1) as f64
            }
            Density::Numeric {
                lo,
                hi,
                centers,
                bandwidth,
            } => {
                let pick = rng.random_range(0..=centers.len());
                if pick == centers.len() {
                    return rng.random_range(*lo..=*hi);
                }
                let c = centers[pick];
                for _ in 0..100 {
                    let x = c + bandwidth * rng.sample::<f64, _>(rand_distr::StandardNormal);
                    if (*lo..=*hi).contains(&x) {
                        return x;
                    }
                }
                c
            }
        }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        match self {
            Density::Categorical { mass } => mass[x as usize].ln(),
            Density::Numeric {
                lo,
                hi,
                centers,
                bandwidth,
            } => {
                let w = 1.0 / (centers.len() as f64 + 1.0);
                let mut total = w / (hi - lo);
                for &c in centers {
                    let mass = normal_cdf((hi - c) / bandwidth) - normal_cdf((lo - c) / bandwidth);
                    let z = (x - c) / bandwidth;
                    let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                    total += w * phi / (bandwidth * mass.max(1e-300));
                }
                total.ln()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_space() -> SearchSpace {
        SearchSpace::new(vec![
            ParamSpec::continuous("x", -2.0, 4.0, false),
            ParamSpec::continuous("y", -2.0, 4.0, false),
        ])
        .unwrap()
    }

    #[test]
    fn same_seed_and_history_give_the_same_point() {
        let space = SearchSpace::hyperparams(true);
        let cfg = TpeConfig {
            n_startup: 5,
            ..TpeConfig::default()
        };
        let hist = minimize(&space, 12, &cfg, 3, |p| vec![p[0], p[2]]);
        assert_eq!(suggest(&hist, &space, 99, &cfg), suggest(&hist, &space, 99, &cfg));
    }

    #[test]
    fn density_integrates_to_one() {
        let spec = ParamSpec::continuous("x", 0.0, 3.0, false);
        let d = Density::new(&spec, &[0.1, 1.0, 2.9, 2.95]);
        let n = 30_000;
        let h = 3.0 / n as f64;
        let total: f64 = (0..n).map(|i| d.log_pdf((i as f64 + 0.5) * h).exp() * h).sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn categorical_mass_sums_to_one() {
        let spec = ParamSpec::categorical("c", vec![4.0, 8.0, 16.0]);
        let Density::Categorical { mass } = Density::new(&spec, &[4.0, 4.0, 16.0]) else {
            panic!()
        };
        assert!((mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(mass[0] > mass[2] && mass[2] > mass[1]);
    }

    #[test]
    fn tpe_concentrates_near_the_optimum() {
        let cfg = TpeConfig {
            n_startup: 10,
            ..TpeConfig::default()
        };
        let hist = minimize(&toy_space(), 80, &cfg, 1, |p| vec![(p[0] - 2.0).powi(2) + (p[1] - 1.0).powi(2)]);
        let late: f64 = hist[60..].iter().map(|o| o.objectives[0]).sum::<f64>() / 20.0;
        let early: f64 = hist[..10].iter().map(|o| o.objectives[0]).sum::<f64>() / 10.0;
        assert!(late < early / 4.0, "late {late} early {early}");
    }
}
