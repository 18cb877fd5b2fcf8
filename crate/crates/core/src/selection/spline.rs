//! Restricted (natural) cubic spline basis in truncated-power form: linear
//! beyond the boundary knots.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpline {
    knots: Vec<f64>,
}

impl NaturalSpline {
    /// Knots must be strictly increasing; two knots give a purely linear basis.
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Numerical(format!("spline knots must be >= 2 and strictly increasing: {knots:?}")));
        }
        Ok(Self { knots })
    }

    /// Boundary knots at the extremes, interior knots at the given quantiles.
    /// Coinciding knots are merged.
    pub fn at_quantiles(values: &[f64], interior: &[f64]) -> Result<Self> {
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (Some(&lo), Some(&hi)) = (sorted.first(), sorted.last()) else {
            return Err(Error::Numerical("no values to place spline knots".into()));
        };
        let mut knots = vec![lo];
        knots.extend(interior.iter().map(|&q| quantile_sorted(&sorted, q)));
        knots.push(hi);
        knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        Self::new(knots)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis columns: one linear term plus `knots - 2` cubic terms.
    pub fn dim(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn basis(&self, x: f64) -> Vec<f64> {
        let k = &self.knots;
        let m = k.len();
        let (last, penult) = (k[m - 1], k[m - 2]);
        let norm = (last - k[0]).powi(2);
        let cube = |v: f64| if v > 0.0 { v * v * v } else { 0.0 };
        let mut out = Vec::with_capacity(self.dim());
        out.push(x);
        for &kj in &k[..m - 2] {
            let term = cube(x - kj) - cube(x - penult) * (last - kj) / (last - penult)
                + cube(x - last) * (penult - kj) / (last - penult);
            out.push(term / norm);
        }
        out
    }
}

/// Linear-interpolation quantile (type 7) of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_linear_outside_the_boundary_knots() {
        let s = NaturalSpline::new(vec![0.0, 1.0, 2.5, 4.0, 5.0]).unwrap();
        assert_eq!(s.dim(), 4);
        for x0 in [6.0, -3.0] {
            let f = |x: f64| s.basis(x);
            let (a, b, c) = (f(x0), f(x0 + 1.0), f(x0 + 2.0));
            for j in 0..s.dim() {
                // second difference vanishes
                assert!((a[j] - 2.0 * b[j] + c[j]).abs() < 1e-9, "column {j} at {x0}");
            }
        }
    }

    #[test]
    fn basis_is_smooth_at_knots() {
        let s = NaturalSpline::new(vec![0.0, 1.0, 2.5, 4.0, 5.0]).unwrap();
        let h = 1e-4;
        for &k in s.knots() {
            let (l, m, r) = (s.basis(k - h), s.basis(k), s.basis(k + h));
            for j in 0..s.dim() {
                let d_left = (m[j] - l[j]) / h;
                let d_right = (r[j] - m[j]) / h;
                assert!((d_left - d_right).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn quantile_knots_merge_ties() {
        let v = [1.0, 1.0, 1.0, 1.0, 2.0];
        let s = NaturalSpline::at_quantiles(&v, &[0.25, 0.5, 0.75]).unwrap();
        assert_eq!(s.knots(), &[1.0, 2.0]);
        assert!(NaturalSpline::at_quantiles(&[3.0; 4], &[0.5]).is_err());
    }
}
