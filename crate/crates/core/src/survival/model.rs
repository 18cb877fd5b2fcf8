use std::borrow::Cow;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::data::{CovariateTransform, SurvivalDataset};
use super::family::Family;
use super::likelihood::AftObjective;
use super::quadrature;
use crate::{Error, Result};

/// How a fit went.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub grad_norm: f64,
    /// Index of the winning start: 0 zeros, 1 least squares, 2 perturbed.
    pub start: usize,
    pub converged_starts: usize,
    pub singular_design: bool,
}

/// A fitted accelerated failure time model `ln T = mu + theta . z + sigma W`
/// on standardized covariates `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AftModel {
    pub family: Family,
    pub schema: Vec<String>,
    pub transform: CovariateTransform,
    pub intercept: f64,
    /// One per schema column, in standardized units.
    pub coefficients: Vec<f64>,
    pub sigma: f64,
    pub log_likelihood: f64,
    pub n_params: usize,
    pub n_rows: usize,
    /// Default upper limit for [`AftModel::expected_survival_time`].
    pub max_observed_time: f64,
    #[serde(default)]
    pub diagnostics: FitDiagnostics,
}

impl AftModel {
    /// Build a model from coefficients on the raw covariate scale, converting
    /// them to the standardized scale of `transform`.
    pub fn from_raw(
        family: Family,
        schema: Vec<String>,
        transform: CovariateTransform,
        intercept: f64,
        raw_coefficients: &[f64],
        sigma: f64,
    ) -> Result<Self> {
        if raw_coefficients.len() != schema.len() || transform.len() != schema.len() {
            return Err(Error::InvalidArgument("coefficient count does not match schema".into()));
        }
        let coefficients: Vec<f64> = raw_coefficients.iter().zip(&transform.scales).map(|(b, s)| b * s).collect();
        let shift: f64 = raw_coefficients.iter().zip(&transform.means).map(|(b, m)| b * m).sum();
        let model = Self {
            family,
            n_params: schema.len() + 2,
            schema,
            transform,
            intercept: intercept + shift,
            coefficients,
            sigma,
            log_likelihood: f64::NAN,
            n_rows: 0,
            max_observed_time: f64::NAN,
            diagnostics: FitDiagnostics::default(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Data(format!("scale must be > 0, got {}", self.sigma)));
        }
        if self.coefficients.len() != self.schema.len() || self.transform.len() != self.schema.len() {
            return Err(Error::Data(format!(
                "{} coefficients and {} transform columns for {} schema columns",
                self.coefficients.len(),
                self.transform.len(),
                self.schema.len()
            )));
        }
        if !self.intercept.is_finite() || self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Data("model coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Intercept and coefficients on the raw covariate scale.
    pub fn raw_coefficients(&self) -> (f64, Vec<f64>) {
        let raw: Vec<f64> = self.coefficients.iter().zip(&self.transform.scales).map(|(b, s)| b / s).collect();
        let shift: f64 = raw.iter().zip(&self.transform.means).map(|(b, m)| b * m).sum();
        (self.intercept - shift, raw)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.schema.len() {
            return Err(Error::InvalidArgument(format!(
                "covariate vector has {} entries, model expects {}",
                x.len(),
                self.schema.len()
            )));
        }
        Ok(())
    }

    pub fn standardize(&self, x: &[f64]) -> Result<Array1<f64>> {
        self.check_len(x)?;
        Ok(self.transform.apply_row(ArrayView1::from(x)))
    }

    /// `theta . z` for standardized `z`.
    pub fn linear_effect_std(&self, z: ArrayView1<f64>) -> f64 {
        z.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
    }

    /// Location `mu + theta . z`, the log of the time scale.
    pub fn location_std(&self, z: ArrayView1<f64>) -> f64 {
        self.intercept + self.linear_effect_std(z)
    }

    /// `S(t | z)` for standardized `z`.
    pub fn survival_std(&self, z: ArrayView1<f64>, t: f64) -> f64 {
        self.survival_at_location(self.location_std(z), t)
    }

    fn survival_at_location(&self, location: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        self.family.survival((t.ln() - location) / self.sigma)
    }

    /// `S(t | x)` for raw covariates `x`.
    pub fn survival_function(&self, x: &[f64], t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
        }
        let z = self.standardize(x)?;
        Ok(self.survival_std(z.view(), t))
    }

    /// Survival with all standardized covariates at zero.
    pub fn baseline_survival(&self, t: f64) -> f64 {
        self.survival_at_location(self.intercept, t)
    }

    /// `phi(x) = exp(theta . z)`, so that `S(t | x) = S_0(t / phi)`.
    pub fn acceleration_factor(&self, x: &[f64]) -> Result<f64> {
        let z = self.standardize(x)?;
        Ok(self.linear_effect_std(z.view()).exp())
    }

    /// Hazard `h(t | x) = f(t | x) / S(t | x)`.
    pub fn hazard(&self, x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("hazard needs t > 0, got {t}")));
        }
        let z = self.standardize(x)?;
        let w = (t.ln() - self.location_std(z.view())) / self.sigma;
        Ok(-self.family.log_survival(w).d1 / (self.sigma * t))
    }

    /// `∫_0^{t*} S(u | x) du`; `t_star` defaults to the longest time in the
    /// fitting data.
    pub fn expected_survival_time(&self, x: &[f64], t_star: Option<f64>) -> Result<f64> {
        let z = self.standardize(x)?;
        self.expected_survival_time_std(z.view(), t_star)
    }

    pub fn expected_survival_time_std(&self, z: ArrayView1<f64>, t_star: Option<f64>) -> Result<f64> {
        let t_star = t_star.unwrap_or(self.max_observed_time);
        if !(t_star.is_finite() && t_star > 0.0) {
            return Err(Error::InvalidArgument(format!("t_star must be > 0, got {t_star}")));
        }
        let location = self.location_std(z);
        quadrature::integrate(|u| self.survival_at_location(location, u), 0.0, t_star, 1e-8 * t_star)
    }

    /// Standardized covariates of `data` under this model's transform.
    pub fn standardized_covariates<'d>(&self, data: &'d SurvivalDataset) -> Result<Cow<'d, Array2<f64>>> {
        if data.schema() != self.schema.as_slice() {
            return Err(Error::Data(format!(
                "schema mismatch: model has {:?}, data has {:?}",
                self.schema,
                data.schema()
            )));
        }
        if data.transform() == &self.transform {
            Ok(Cow::Borrowed(data.standardized()))
        } else {
            Ok(Cow::Owned(self.transform.apply(data.raw())))
        }
    }

    /// Censored log-likelihood of `data` under this model (no ridge term).
    pub fn log_likelihood_of(&self, data: &SurvivalDataset) -> Result<f64> {
        let z = self.standardized_covariates(data)?;
        let obj = AftObjective::new(self.family, &z, data.times(), data.events(), 0.0, None);
        let mut params = Vec::with_capacity(self.coefficients.len() + 2);
        params.push(self.intercept);
        params.extend_from_slice(&self.coefficients);
        params.push(self.sigma.ln());
        obj.log_likelihood(&params).map_err(|row| Error::NonFinite {
            what: "log-likelihood".into(),
            row,
        })
    }
}

/// Censored log-likelihood `Σ_events ln f(t|x) + Σ_censored ln S(t|x)`.
pub fn log_likelihood(model: &AftModel, data: &SurvivalDataset) -> Result<f64> {
    model.log_likelihood_of(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exponential(scale: f64) -> AftModel {
        AftModel::from_raw(Family::Weibull, vec![], CovariateTransform::identity(0), scale.ln(), &[], 1.0).unwrap()
    }

    fn two_covariate(family: Family, rng: &mut ChaCha8Rng) -> AftModel {
        let transform = CovariateTransform {
            means: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            scales: vec![rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)],
        };
        AftModel::from_raw(
            family,
            vec!["a".into(), "b".into()],
            transform,
            rng.random_range(-1.0..1.0),
            &[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            rng.random_range(0.3..2.0),
        )
        .unwrap()
    }

    #[test]
    fn survival_starts_at_one_and_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for family in Family::ALL {
            let m = two_covariate(family, &mut rng);
            let x = [0.3, -0.2];
            assert_eq!(m.survival_function(&x, 0.0).unwrap(), 1.0);
            let mut last = 1.0;
            for k in 1..400 {
                let s = m.survival_function(&x, k as f64 * 0.05).unwrap();
                assert!((0.0..=1.0).contains(&s) && s <= last);
                last = s;
            }
        }
    }

    #[test]
    fn unit_exponential_closed_form() {
        let m = exponential(1.0);
        assert!((m.survival_function(&[], 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let e = m.expected_survival_time(&[], Some(1.0)).unwrap();
        assert!((e - (1.0 - (-1.0f64).exp())).abs() < 1e-8);
    }

    #[test]
    fn long_horizon_expected_time_is_the_mean() {
        let m = exponential(2.5);
        let e = m.expected_survival_time(&[], Some(2.5 * 60.0)).unwrap();
        assert!((e - 2.5).abs() < 1e-6, "{e}");
    }

    #[test]
    fn quadrature_matches_a_fine_riemann_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for family in Family::ALL {
            let m = two_covariate(family, &mut rng);
            let x = [0.4, 0.9];
            let t_star = 3.0;
            let q = m.expected_survival_time(&x, Some(t_star)).unwrap();
            let n = 1_000_000;
            let h = t_star / n as f64;
            let riemann: f64 = (0..n).map(|i| m.survival_function(&x, (i as f64 + 0.5) * h).unwrap() * h).sum();
            assert!((q - riemann).abs() < 1e-6 * riemann, "{family}: {q} vs {riemann}");
        }
    }

    #[test]
    fn acceleration_factor_rescales_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for family in Family::ALL {
            for _ in 0..20 {
                let m = two_covariate(family, &mut rng);
                let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let phi = m.acceleration_factor(&x).unwrap();
                for &t in &[0.01, 0.3, 1.0, 4.0] {
                    let lhs = m.survival_function(&x, t).unwrap();
                    let rhs = m.baseline_survival(t / phi);
                    assert!((lhs - rhs).abs() < 1e-10, "{family}");
                }
            }
        }
    }

    #[test]
    fn acceleration_factor_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = two_covariate(Family::Weibull, &mut rng);
        // raw x at the transform means standardizes to zero
        let at_mean = m.transform.means.clone();
        assert!((m.acceleration_factor(&at_mean).unwrap() - 1.0).abs() < 1e-12);
        let mut moved = at_mean.clone();
        let delta = 0.7;
        moved[1] += delta * m.transform.scales[1];
        let ratio = m.acceleration_factor(&moved).unwrap() / m.acceleration_factor(&at_mean).unwrap();
        assert!((ratio - (m.coefficients[1] * delta).exp()).abs() < 1e-12);
    }

    #[test]
    fn raw_coefficients_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = two_covariate(Family::LogNormal, &mut rng);
        let (mu, raw) = m.raw_coefficients();
        let again = AftModel::from_raw(m.family, m.schema.clone(), m.transform.clone(), mu, &raw, m.sigma).unwrap();
        assert!((again.intercept - m.intercept).abs() < 1e-12);
        for (a, b) in again.coefficients.iter().zip(&m.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hazard_is_density_over_survival() {
        let m = exponential(4.0);
        assert!((m.hazard(&[], 1.3).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn exponential_log_likelihood_closed_form() {
        let times = vec![0.5, 1.2, 3.0, 0.1, 2.2];
        let events = vec![true, false, true, true, false];
        let data = SurvivalDataset::new(vec![], times.clone(), events.clone(), Array2::zeros((5, 0))).unwrap();
        let scale: f64 = 1.7;
        let m = exponential(scale);
        let d = events.iter().filter(|e| **e).count() as f64;
        let total: f64 = times.iter().sum();
        let closed = -d * scale.ln() - total / scale;
        assert!((log_likelihood(&m, &data).unwrap() - closed).abs() < 1e-9);
    }

    #[test]
    fn empty_data_has_zero_log_likelihood() {
        let data = SurvivalDataset::new(vec![], vec![], vec![], Array2::zeros((0, 0))).unwrap();
        assert_eq!(log_likelihood(&exponential(1.0), &data).unwrap(), 0.0);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let data = SurvivalDataset::new(vec!["q".into()], vec![1.0], vec![true], Array2::zeros((1, 1))).unwrap();
        assert!(log_likelihood(&exponential(1.0), &data).is_err());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let m = exponential(1.0);
        assert!(m.survival_function(&[], -1.0).is_err());
        assert!(m.survival_function(&[1.0], 1.0).is_err());
        assert!(m.expected_survival_time(&[], Some(0.0)).is_err());
        assert!(AftModel::from_raw(Family::Weibull, vec![], CovariateTransform::identity(0), 0.0, &[], 0.0).is_err());
    }
}
