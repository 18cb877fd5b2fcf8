use crate::{Error, Result};

/// Lebesgue measure of the region dominated by `front` and bounded by
/// `reference` (minimization). Exact in any dimension by slicing along the
/// last objective.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let d = reference.len();
    if d == 0 || reference.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidArgument("reference point must be non-empty and finite".into()));
    }
    for p in front {
        if p.len() != d {
            return Err(Error::InvalidArgument(format!(
                "point has {} objectives, reference has {d}",
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("front contains a non-finite value".into()));
        }
        if p.iter().zip(reference).any(|(v, r)| v > r) {
            return Err(Error::InvalidArgument(format!(
                "reference {reference:?} is not dominated by front point {p:?}"
            )));
        }
    }
    Ok(slice_volume(front.to_vec(), reference))
}

fn slice_volume(mut pts: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let d = reference.len();
    if pts.is_empty() {
        return 0.0;
    }
    if d == 1 {
        let best = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return reference[0] - best;
    }
    if d == 2 {
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let mut area = 0.0;
        let mut y = reference[1];
        for p in &pts {
            if p[1] < y {
                area += (reference[0] - p[0]) * (y - p[1]);
                y = p[1];
            }
        }
        return area;
    }
    // sweep the last coordinate upward; each slab sees every point below it
    let k = d - 1;
    pts.sort_by(|a, b| a[k].total_cmp(&b[k]));
    let mut total = 0.0;
    let mut active: Vec<Vec<f64>> = Vec::new();
    for i in 0..pts.len() {
        active.push(pts[i][..k].to_vec());
        let upper = if i + 1 < pts.len() { pts[i + 1][k] } else { reference[k] };
        let depth = upper - pts[i][k];
        if depth > 0.0 {
            total += depth * slice_volume(active.clone(), &reference[..k]);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_square() {
        assert_eq!(hypervolume(&[vec![0.0, 0.0]], &[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn two_points_by_inclusion_exclusion() {
        let hv = hypervolume(&[vec![0.5, 0.0], vec![0.0, 0.5]], &[1.0, 1.0]).unwrap();
        // 0.5 + 0.5 - 0.25
        assert!((hv - 0.75).abs() < 1e-15);
    }

    #[test]
    fn dominated_point_changes_nothing() {
        let base = vec![vec![0.2, 0.6, 0.1], vec![0.5, 0.1, 0.4]];
        let mut more = base.clone();
        more.push(vec![0.6, 0.7, 0.5]);
        let r = [1.0, 1.0, 1.0];
        assert_eq!(hypervolume(&base, &r).unwrap(), hypervolume(&more, &r).unwrap());
    }

    #[test]
    fn three_dimensions_match_a_grid_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let exact = hypervolume(&pts, &[1.0, 1.0, 1.0]).unwrap();
        let g = 100;
        let mut hit = 0;
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    let q = [(a as f64 + 0.5) / g as f64, (b as f64 + 0.5) / g as f64, (c as f64 + 0.5) / g as f64];
                    if pts.iter().any(|p| p.iter().zip(&q).all(|(x, y)| x <= y)) {
                        hit += 1;
                    }
                }
            }
        }
        let grid = hit as f64 / (g * g * g) as f64;
        assert!((exact - grid).abs() < 0.01, "{exact} vs {grid}");
    }

    #[test]
    fn invalid_reference_is_rejected() {
        assert!(hypervolume(&[vec![2.0, 0.0]], &[1.0, 1.0]).is_err());
        assert!(hypervolume(&[vec![0.0]], &[1.0, 1.0]).is_err());
        assert!(hypervolume(&[], &[f64::NAN]).is_err());
        assert_eq!(hypervolume(&[], &[1.0, 1.0]).unwrap(), 0.0);
    }
}
