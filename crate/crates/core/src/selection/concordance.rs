use crate::survival::{AftModel, SurvivalDataset};
use crate::{Error, Result};

/// Harrell's C for scores where a higher value predicts longer survival.
///
/// A pair is comparable when the shorter time is an event; pairs with equal
/// times are not comparable and tied scores count one half.
pub fn concordance_index(times: &[f64], events: &[bool], scores: &[f64]) -> Result<f64> {
    if times.len() != events.len() || times.len() != scores.len() {
        return Err(Error::InvalidArgument("times, events and scores differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) || times.iter().any(|t| t.is_nan()) {
        return Err(Error::InvalidArgument("NaN in concordance input".into()));
    }

    // Rows of one trial share time and score, so collapse identical
    // (time, score) pairs into weighted groups first.
    let mut rows: Vec<(f64, f64, bool)> = (0..times.len()).map(|i| (times[i], scores[i], events[i])).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut groups: Vec<(f64, f64, f64, f64)> = Vec::new(); // time, score, events, total
    for (t, s, e) in rows {
        match groups.last_mut() {
            Some(g) if g.0 == t && g.1 == s => {
                g.2 += f64::from(u8::from(e));
                g.3 += 1.0;
            }
            _ => groups.push((t, s, f64::from(u8::from(e)), 1.0)),
        }
    }

    let (mut concordant, mut comparable) = (0.0, 0.0);
    for (a, gi) in groups.iter().enumerate() {
        if gi.2 == 0.0 {
            continue;
        }
        for gj in &groups[a + 1..] {
            if gj.0 <= gi.0 {
                continue;
            }
            let w = gi.2 * gj.3;
            comparable += w;
            concordant += w * if gi.1 < gj.1 {
                1.0
            } else if gi.1 == gj.1 {
                0.5
            } else {
                0.0
            };
        }
    }
    if comparable == 0.0 {
        return Err(Error::Data("no comparable pairs for concordance".into()));
    }
    Ok(concordant / comparable)
}

/// Concordance of the model's predicted survival ordering on `data`. The
/// score is the location `mu + theta . z`, which orders rows the same way as
/// the expected survival time for every family.
pub fn concordance(model: &AftModel, data: &SurvivalDataset) -> Result<f64> {
    let z = model.standardized_covariates(data)?;
    let scores: Vec<f64> = z.rows().into_iter().map(|r| model.location_std(r)).collect();
    concordance_index(data.times(), data.events(), &scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct O(n^2) definition.
    fn brute(times: &[f64], events: &[bool], scores: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..times.len() {
            for j in 0..times.len() {
                if events[i] && times[i] < times[j] {
                    den += 1.0;
                    num += if scores[i] < scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn grouped_count_matches_the_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 60;
            let times: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
            let events: Vec<bool> = (0..n).map(|_| rng.random_bool(0.6)).collect();
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
            if !(0..n).any(|i| events[i] && times.iter().any(|t| *t > times[i])) {
                continue;
            }
            let c = concordance_index(&times, &events, &scores).unwrap();
            assert!((c - brute(&times, &events, &scores)).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_and_constant_predictions() {
        let times: Vec<f64> = (1..=50).map(f64::from).collect();
        let events = vec![true; 50];
        assert_eq!(concordance_index(&times, &events, &times).unwrap(), 1.0);
        assert_eq!(concordance_index(&times, &events, &vec![3.0; 50]).unwrap(), 0.5);
        let reversed: Vec<f64> = times.iter().map(|t| -t).collect();
        assert_eq!(concordance_index(&times, &events, &reversed).unwrap(), 0.0);
    }

    #[test]
    fn invariant_under_monotone_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let times: Vec<f64> = (0..200).map(|_| rng.random_range(0.1..5.0)).collect();
        let events: Vec<bool> = (0..200).map(|_| rng.random_bool(0.7)).collect();
        let scores: Vec<f64> = (0..200).map(|_| rng.random_range(-2.0..2.0)).collect();
        let warped: Vec<f64> = scores.iter().map(|s: &f64| s.exp() * 3.0 + 1.0).collect();
        assert_eq!(
            concordance_index(&times, &events, &scores).unwrap(),
            concordance_index(&times, &events, &warped).unwrap()
        );
    }

    #[test]
    fn no_comparable_pairs_is_an_error() {
        let r = concordance_index(&[1.0, 2.0], &[false, false], &[0.0, 1.0]);
        assert!(matches!(r, Err(Error::Data(_))));
        let tied = concordance_index(&[1.0, 1.0], &[true, true], &[0.0, 1.0]);
        assert!(tied.is_err());
    }
}
