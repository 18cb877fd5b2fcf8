//! Censored AFT log-likelihood with analytic derivatives in `(mu, theta, ln sigma)`.
//!
//! With `z = (ln t - eta) / sigma` a row contributes `g(z) - ln sigma - ln t` if
//! it is an event and `G(z)` if censored, where `g = ln f_W` and `G = ln S_W`.

use ndarray::{Array2, ArrayView1};

use super::family::Family;
use super::newton::{Evaluation, Objective};

pub(crate) struct AftObjective<'a> {
    pub family: Family,
    pub covariates: &'a Array2<f64>,
    pub log_times: Vec<f64>,
    pub events: &'a [bool],
    pub ridge: f64,
    /// When set, `ln sigma` is held at this value and is not a parameter.
    pub fixed_log_sigma: Option<f64>,
}

impl<'a> AftObjective<'a> {
    pub fn new(
        family: Family,
        covariates: &'a Array2<f64>,
        times: &[f64],
        events: &'a [bool],
        ridge: f64,
        fixed_log_sigma: Option<f64>,
    ) -> Self {
        Self {
            family,
            covariates,
            log_times: times.iter().map(|t| t.ln()).collect(),
            events,
            ridge,
            fixed_log_sigma,
        }
    }

    fn p(&self) -> usize {
        self.covariates.ncols()
    }

    fn log_sigma(&self, params: &[f64]) -> f64 {
        self.fixed_log_sigma.unwrap_or_else(|| params[self.p() + 1])
    }

    fn eta(&self, params: &[f64], row: ArrayView1<f64>) -> f64 {
        params[0] + row.iter().zip(&params[1..=self.p()]).map(|(x, b)| x * b).sum::<f64>()
    }

    fn penalty(&self, params: &[f64]) -> f64 {
        0.5 * self.ridge * params[1..=self.p()].iter().map(|b| b * b).sum::<f64>()
    }

    /// Row contribution and its first two derivatives in `z`.
    fn row_terms(&self, z: f64, event: bool) -> (f64, f64, f64) {
        let t = if event {
            self.family.log_density(z)
        } else {
            self.family.log_survival(z)
        };
        (t.value, t.d1, t.d2)
    }

    /// Unpenalized log-likelihood, or the first row where it is not finite.
    pub fn log_likelihood(&self, params: &[f64]) -> Result<f64, usize> {
        let s = self.log_sigma(params);
        let sigma = s.exp();
        let mut total = 0.0;
        for (i, row) in self.covariates.rows().into_iter().enumerate() {
            let z = (self.log_times[i] - self.eta(params, row)) / sigma;
            let (v, _, _) = self.row_terms(z, self.events[i]);
            let v = if self.events[i] { v - s - self.log_times[i] } else { v };
            if !v.is_finite() {
                return Err(i);
            }
            total += v;
        }
        Ok(total)
    }
}

impl Objective for AftObjective<'_> {
    fn dim(&self) -> usize {
        self.p() + 1 + usize::from(self.fixed_log_sigma.is_none())
    }

    fn value(&self, params: &[f64]) -> f64 {
        match self.log_likelihood(params) {
            Ok(v) => v - self.penalty(params),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn evaluate(&self, params: &[f64]) -> Evaluation {
        let p = self.p();
        let dim = self.dim();
        let free_sigma = self.fixed_log_sigma.is_none();
        let s = self.log_sigma(params);
        let sigma = s.exp();
        let mut value = 0.0;
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        // scratch: [1, x_1..x_p]
        let mut x = vec![1.0; p + 1];

        for (i, row) in self.covariates.rows().into_iter().enumerate() {
            for (dst, v) in x[1..].iter_mut().zip(row.iter()) {
                *dst = *v;
            }
            let event = self.events[i];
            let z = (self.log_times[i] - self.eta(params, row)) / sigma;
            let (v, lz, lzz) = self.row_terms(z, event);
            value += if event { v - s - self.log_times[i] } else { v };

            let g_eta = -lz / sigma;
            let h_eta = lzz / (sigma * sigma);
            for a in 0..=p {
                grad[a] += g_eta * x[a];
                for b in 0..=a {
                    hess[a * dim + b] += h_eta * x[a] * x[b];
                }
            }
            if free_sigma {
                let k = p + 1;
                grad[k] += -z * lz - f64::from(u8::from(event));
                let h_cross = (z * lzz + lz) / sigma;
                for a in 0..=p {
                    hess[k * dim + a] += h_cross * x[a];
                }
                hess[k * dim + k] += z * lz + z * z * lzz;
            }
        }

        value -= self.penalty(params);
        for j in 1..=p {
            grad[j] -= self.ridge * params[j];
            hess[j * dim + j] -= self.ridge;
        }
        for a in 0..dim {
            for b in 0..a {
                hess[b * dim + a] = hess[a * dim + b];
            }
        }
        Evaluation {
            value,
            gradient: grad,
            hessian: hess,
        }
    }
}
