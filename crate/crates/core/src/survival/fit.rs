use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::data::SurvivalDataset;
use super::family::Family;
use super::likelihood::AftObjective;
use super::model::{AftModel, FitDiagnostics};
use super::newton::{cholesky_in_place, cholesky_solve, maximize, Maximum, NewtonOptions, Objective};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Convergence threshold on the max-norm of the gradient.
    pub tol: f64,
    pub max_iter: usize,
    /// L2 penalty on the covariate coefficients (not the intercept or scale).
    pub ridge: f64,
    /// Hold `sigma` fixed instead of estimating it, e.g. 1 for an exponential
    /// model with the Weibull family.
    pub fixed_sigma: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 500,
            ridge: 1e-8,
            fixed_sigma: None,
        }
    }
}

const STEP_TOL: f64 = 1e-9;

/// Maximum-likelihood AFT fit by damped Newton ascent from three starts
/// (zeros, least squares on the log event times, perturbed zeros). The best
/// converged start wins; ties go to the earlier start.
pub fn fit_aft(data: &SurvivalDataset, family: Family, opts: &FitOptions) -> Result<AftModel> {
    if data.n_events() == 0 {
        return Err(Error::Data("cannot fit a survival model without events".into()));
    }
    let mut event_times: Vec<f64> = data
        .times()
        .iter()
        .zip(data.events())
        .filter(|(_, e)| **e)
        .map(|(t, _)| *t)
        .collect();
    event_times.sort_by(f64::total_cmp);
    event_times.dedup();
    if event_times.len() < 2 {
        return Err(Error::Data("need at least two distinct event times to fit".into()));
    }
    if let Some(s) = opts.fixed_sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!("fixed sigma must be > 0, got {s}")));
        }
    }

    let z = data.standardized();
    let singular = is_singular(z);
    if singular {
        log::warn!("covariate design is singular; coefficients are identified only through the ridge penalty");
    }
    let fixed_log_sigma = opts.fixed_sigma.map(f64::ln);
    let obj = AftObjective::new(family, z, data.times(), data.events(), opts.ridge, fixed_log_sigma);
    let newton = NewtonOptions {
        grad_tol: opts.tol,
        step_tol: STEP_TOL,
        max_iter: opts.max_iter,
    };

    let p = data.n_covariates();
    let mut best: Option<(usize, Maximum)> = None;
    let mut best_failed: Option<Maximum> = None;
    let mut converged_starts = 0;
    for (k, start) in starts(data, p, fixed_log_sigma.is_none()).into_iter().enumerate() {
        let result = match maximize(&obj, &start, &newton) {
            Ok(m) => m,
            Err(e) => {
                log::debug!("{family} start {k} failed: {e}");
                continue;
            }
        };
        if result.converged {
            converged_starts += 1;
            if best.as_ref().is_none_or(|(_, b)| result.value > b.value) {
                best = Some((k, result));
            }
        } else if best_failed.as_ref().is_none_or(|b| result.value > b.value) {
            best_failed = Some(result);
        }
    }

    let Some((start, m)) = best else {
        let (iterations, grad_norm, log_likelihood) = best_failed
            .map(|b| (b.iterations, b.grad_norm, b.value))
            .unwrap_or((opts.max_iter, f64::NAN, f64::NAN));
        return Err(Error::NonConvergence {
            iterations,
            grad_norm,
            log_likelihood,
        });
    };

    let sigma = opts.fixed_sigma.unwrap_or_else(|| m.params[p + 1].exp());
    let log_likelihood = obj
        .log_likelihood(&m.params)
        .map_err(|row| Error::NonFinite {
            what: "log-likelihood at the optimum".into(),
            row,
        })?;
    let model = AftModel {
        family,
        schema: data.schema().to_vec(),
        transform: data.transform().clone(),
        intercept: m.params[0],
        coefficients: m.params[1..=p].to_vec(),
        sigma,
        log_likelihood,
        n_params: obj.dim(),
        n_rows: data.len(),
        max_observed_time: data.max_time().unwrap_or(f64::NAN),
        diagnostics: FitDiagnostics {
            iterations: m.iterations,
            grad_norm: m.grad_norm,
            start,
            converged_starts,
            singular_design: singular,
        },
    };
    model.validate()?;
    Ok(model)
}

fn starts(data: &SurvivalDataset, p: usize, free_sigma: bool) -> Vec<Vec<f64>> {
    let dim = p + 1 + usize::from(free_sigma);
    let zeros = vec![0.0; dim];
    let perturbed: Vec<f64> = (0..dim).map(|j| if j % 2 == 0 { 0.1 } else { -0.1 }).collect();
    let mut ls = least_squares_start(data, p).unwrap_or_else(|| zeros.clone());
    if !free_sigma {
        ls.truncate(p + 1);
    }
    vec![zeros, ls, perturbed]
}

/// Regress log event times on the standardized covariates; `ln sigma` starts
/// at the log residual standard deviation.
fn least_squares_start(data: &SurvivalDataset, p: usize) -> Option<Vec<f64>> {
    let z = data.standardized();
    let rows: Vec<usize> = (0..data.len()).filter(|&i| data.events()[i]).collect();
    let q = p + 1;
    let mut xtx = vec![0.0; q * q];
    let mut xty = vec![0.0; q];
    let mut x = vec![1.0; q];
    for &i in &rows {
        for j in 0..p {
            x[j + 1] = z[[i, j]];
        }
        let y = data.times()[i].ln();
        for a in 0..q {
            xty[a] += x[a] * y;
            for b in 0..q {
                xtx[a * q + b] += x[a] * x[b];
            }
        }
    }
    let n = rows.len() as f64;
    for a in 1..q {
        xtx[a * q + a] += 1e-8 * n.max(1.0);
    }
    let beta = cholesky_solve(&mut xtx, q, &xty)?;
    let mut rss = 0.0;
    for &i in &rows {
        let fitted = beta[0] + (0..p).map(|j| beta[j + 1] * z[[i, j]]).sum::<f64>();
        rss += (data.times()[i].ln() - fitted).powi(2);
    }
    let sd = (rss / n).sqrt();
    let mut start = beta;
    start.push(if sd > 1e-8 { sd.ln() } else { 0.0 });
    start.iter().all(|v| v.is_finite()).then_some(start)
}

/// True when the intercept plus standardized covariates are (numerically)
/// collinear.
fn is_singular(z: &Array2<f64>) -> bool {
    let (n, p) = z.dim();
    if n == 0 {
        return p > 0;
    }
    let q = p + 1;
    let mut gram = vec![0.0; q * q];
    let mut x = vec![1.0; q];
    for row in z.rows() {
        for (dst, v) in x[1..].iter_mut().zip(row.iter()) {
            *dst = *v;
        }
        for a in 0..q {
            for b in 0..q {
                gram[a * q + b] += x[a] * x[b] / n as f64;
            }
        }
    }
    if cholesky_in_place(&mut gram, q).is_none() {
        return true;
    }
    (0..q).any(|i| gram[i * q + i] < 1e-6)
}
