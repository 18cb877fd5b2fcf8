//! Damped Newton ascent for small, smooth log-likelihoods.

use crate::{Error, Result};

/// Value, gradient and Hessian of an objective at one point.
pub(crate) struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Row-major `dim * dim`.
    pub hessian: Vec<f64>,
}

pub(crate) trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, params: &[f64]) -> f64;
    fn evaluate(&self, params: &[f64]) -> Evaluation;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NewtonOptions {
    pub grad_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Maximum {
    pub params: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximize `obj` from `start`. Never errors on non-convergence; the caller
/// decides what to do with `converged == false`.
pub(crate) fn maximize(obj: &impl Objective, start: &[f64], opts: &NewtonOptions) -> Result<Maximum> {
    let n = obj.dim();
    let mut x = start.to_vec();
    let mut ev = obj.evaluate(&x);
    if !ev.value.is_finite() || ev.gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("objective is not finite at the starting point".into()));
    }
    for iter in 0..opts.max_iter {
        let gnorm = max_norm(&ev.gradient);
        if gnorm < opts.grad_tol {
            return Ok(Maximum {
                params: x,
                value: ev.value,
                grad_norm: gnorm,
                iterations: iter,
                converged: true,
            });
        }

        // Solve (-H + damping I) d = g, raising the damping until the system is
        // positive definite.
        let neg_h: Vec<f64> = ev.hessian.iter().map(|v| -v).collect();
        let diag_scale = (0..n).map(|i| neg_h[i * n + i].abs()).fold(1e-12, f64::max);
        let mut damping = 0.0;
        let direction = loop {
            let mut m = neg_h.clone();
            for i in 0..n {
                m[i * n + i] += damping;
            }
            if let Some(d) = cholesky_solve(&mut m, n, &ev.gradient) {
                if d.iter().all(|v| v.is_finite()) {
                    break d;
                }
            }
            damping = if damping == 0.0 { 1e-8 * diag_scale } else { damping * 10.0 };
            if damping > 1e20 * diag_scale {
                // fall back to steepest ascent
                break ev.gradient.iter().map(|g| g / diag_scale).collect();
            }
        };

        let slope: f64 = direction.iter().zip(&ev.gradient).map(|(d, g)| d * g).sum();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&direction).map(|(a, d)| a + step * d).collect();
            let v = obj.value(&trial);
            if v.is_finite() && v >= ev.value + 1e-4 * step * slope.min(0.0).abs().max(0.0) && v >= ev.value {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }

        let Some(next) = accepted else {
            // no ascent possible at working precision
            return Ok(Maximum {
                params: x,
                value: ev.value,
                grad_norm: gnorm,
                iterations: iter,
                converged: false,
            });
        };
        let moved = max_norm(&next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        x = next;
        ev = obj.evaluate(&x);
        if !ev.value.is_finite() || ev.gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical("objective became non-finite".into()));
        }
        if moved < opts.step_tol {
            let gnorm = max_norm(&ev.gradient);
            return Ok(Maximum {
                params: x,
                value: ev.value,
                grad_norm: gnorm,
                iterations: iter + 1,
                converged: true,
            });
        }
    }
    let gnorm = max_norm(&ev.gradient);
    Ok(Maximum {
        params: x,
        value: ev.value,
        grad_norm: gnorm,
        converged: gnorm < opts.grad_tol,
        iterations: opts.max_iter,
    })
}

/// In-place Cholesky factorization of the row-major `n * n` matrix `a`, then
/// solve `a x = b`. Returns `None` unless `a` is positive definite.
pub(crate) fn cholesky_solve(a: &mut [f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    cholesky_in_place(a, n)?;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= a[i * n + k] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= a[k * n + i] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    Some(y)
}

/// Lower-triangular factor stored in the lower half of `a`.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Option<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Some(())
}
