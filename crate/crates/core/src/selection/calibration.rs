//! Calibration of predicted failure probabilities at a fixed horizon.
//!
//! The complementary log-log of each prediction enters a Cox model through a
//! natural cubic spline. The refitted model gives a calibrated probability for
//! every row, and ICI and E50 are the mean and median absolute gap between
//! calibrated and predicted values.

use serde::{Deserialize, Serialize};

use super::spline::NaturalSpline;
use crate::survival::newton::{maximize, Evaluation, NewtonOptions, Objective};
use crate::survival::{AftModel, SurvivalDataset};
use crate::{Error, Result};

/// Quantiles of the interior spline knots.
pub const INTERIOR_KNOTS: [f64; 3] = [0.25, 0.5, 0.75];

const P_CLIP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub t0: f64,
    pub ici: f64,
    pub e50: f64,
    /// `(predicted, calibrated)` pairs sorted by prediction.
    pub curve: Vec<(f64, f64)>,
}

/// Predicted failure probabilities `1 - S(t0 | x)` of `model` on `eval`,
/// recalibrated on `eval`. `t0` defaults to the median observed time of `train`.
pub fn calibration_metrics(
    model: &AftModel,
    train: &SurvivalDataset,
    eval: &SurvivalDataset,
    t0: Option<f64>,
) -> Result<Calibration> {
    let t0 = match t0 {
        Some(t) => t,
        None => train
            .median_time()
            .ok_or_else(|| Error::Data("training data is empty".into()))?,
    };
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::InvalidArgument(format!("calibration horizon must be > 0, got {t0}")));
    }
    let z = model.standardized_covariates(eval)?;
    let predicted: Vec<f64> = z.rows().into_iter().map(|r| 1.0 - model.survival_std(r, t0)).collect();
    recalibrate(&predicted, eval.times(), eval.events(), t0)
}

/// Calibrate arbitrary predicted failure probabilities against observed data.
pub fn recalibrate(predicted: &[f64], times: &[f64], events: &[bool], t0: f64) -> Result<Calibration> {
    let n = predicted.len();
    if times.len() != n || events.len() != n {
        return Err(Error::InvalidArgument("predictions, times and events differ in length".into()));
    }
    if !events.iter().any(|e| *e) {
        return Err(Error::Data("calibration needs at least one event".into()));
    }
    if predicted.iter().any(|p| !p.is_finite()) {
        return Err(Error::Numerical("non-finite predicted probability".into()));
    }
    let p: Vec<f64> = predicted.iter().map(|v| v.clamp(P_CLIP, 1.0 - P_CLIP)).collect();
    let (lo, hi) = p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if hi - lo <= 1e-12 {
        return Err(Error::Data(
            "degenerate calibration spline: all predicted probabilities are identical".into(),
        ));
    }
    let cll: Vec<f64> = p.iter().map(|v| (-(-v).ln_1p()).ln()).collect();
    let spline = NaturalSpline::at_quantiles(&cll, &INTERIOR_KNOTS)?;

    // standardized spline design
    let d = spline.dim();
    let mut x: Vec<Vec<f64>> = cll.iter().map(|c| spline.basis(*c)).collect();
    for j in 0..d {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let sd = (x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let sd = if sd > 0.0 { sd } else { 1.0 };
        for r in &mut x {
            r[j] = (r[j] - mean) / sd;
        }
    }

    let cox = CoxObjective::new(&x, times, events);
    let fit = maximize(
        &cox,
        &vec![0.0; d],
        &NewtonOptions {
            grad_tol: 1e-8 * n as f64,
            step_tol: 1e-10,
            max_iter: 200,
        },
    )?;
    if !fit.converged {
        return Err(Error::NonConvergence {
            iterations: fit.iterations,
            grad_norm: fit.grad_norm,
            log_likelihood: fit.value,
        });
    }
    let eta: Vec<f64> = x.iter().map(|r| dot(r, &fit.params)).collect();
    let h0 = cox.breslow_cumulative_hazard(&eta, t0);
    let calibrated: Vec<f64> = eta.iter().map(|e| -(-h0 * e.exp()).exp_m1()).collect();

    let (ici, e50) = ici_e50(&p, &calibrated);
    let mut curve: Vec<(f64, f64)> = p.iter().copied().zip(calibrated).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(Calibration { t0, ici, e50, curve })
}

/// Mean and median absolute difference between calibrated and predicted.
pub fn ici_e50(predicted: &[f64], calibrated: &[f64]) -> (f64, f64) {
    let mut gaps: Vec<f64> = predicted.iter().zip(calibrated).map(|(p, c)| (c - p).abs()).collect();
    if gaps.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    gaps.sort_by(f64::total_cmp);
    let m = gaps.len();
    let median = if m % 2 == 1 { gaps[m / 2] } else { 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]) };
    (mean, median)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cox partial log-likelihood with Breslow handling of tied times.
struct CoxObjective<'a> {
    x: &'a [Vec<f64>],
    times: &'a [f64],
    events: &'a [bool],
    /// Row indices by decreasing time.
    order: Vec<usize>,
}

impl<'a> CoxObjective<'a> {
    fn new(x: &'a [Vec<f64>], times: &'a [f64], events: &'a [bool]) -> Self {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
        Self { x, times, events, order }
    }

    /// Consecutive runs of `order` sharing one time.
    fn groups(&self) -> impl Iterator<Item = &[usize]> {
        self.order.chunk_by(|&a, &b| self.times[a] == self.times[b])
    }

    /// `H0(t0) = Σ_{event times τ <= t0} d_τ / Σ_{t_j >= τ} exp(eta_j)`.
    fn breslow_cumulative_hazard(&self, eta: &[f64], t0: f64) -> f64 {
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut risk = 0.0;
        let mut h = 0.0;
        for group in self.groups() {
            for &i in group {
                risk += (eta[i] - shift).exp();
            }
            let t = self.times[group[0]];
            let d = group.iter().filter(|&&i| self.events[i]).count() as f64;
            if d > 0.0 && t <= t0 {
                h += d / risk;
            }
        }
        h * (-shift).exp()
    }
}

impl Objective for CoxObjective<'_> {
    fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    fn value(&self, beta: &[f64]) -> f64 {
        let eta: Vec<f64> = self.x.iter().map(|r| dot(r, beta)).collect();
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut risk = 0.0;
        let mut total = 0.0;
        for group in self.groups() {
            for &i in group {
                risk += (eta[i] - shift).exp();
            }
            for &i in group.iter().filter(|&&i| self.events[i]) {
                total += eta[i] - shift - risk.ln();
            }
        }
        total
    }

    fn evaluate(&self, beta: &[f64]) -> Evaluation {
        let d = self.dim();
        let eta: Vec<f64> = self.x.iter().map(|r| dot(r, beta)).collect();
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; d];
        let mut s2 = vec![0.0; d * d];
        let mut value = 0.0;
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        for group in self.groups() {
            for &i in group {
                let w = (eta[i] - shift).exp();
                s0 += w;
                let xi = &self.x[i];
                for a in 0..d {
                    s1[a] += w * xi[a];
                    for b in 0..d {
                        s2[a * d + b] += w * xi[a] * xi[b];
                    }
                }
            }
            let mut deaths = 0.0;
            for &i in group.iter().filter(|&&i| self.events[i]) {
                deaths += 1.0;
                value += eta[i] - shift - s0.ln();
                for a in 0..d {
                    grad[a] += self.x[i][a];
                }
            }
            if deaths > 0.0 {
                for a in 0..d {
                    let ma = s1[a] / s0;
                    grad[a] -= deaths * ma;
                    for b in 0..d {
                        hess[a * d + b] -= deaths * (s2[a * d + b] / s0 - ma * s1[b] / s0);
                    }
                }
            }
        }
        Evaluation {
            value,
            gradient: grad,
            hessian: hess,
        }
    }
}
