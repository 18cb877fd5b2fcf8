use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::calibration::calibration_metrics;
use super::concordance::concordance;
use super::criteria::information_criteria;
use crate::survival::{build_survival_dataset, build_survival_dataset_like, fit_aft, AftModel, Family, FitOptions, SurvivalDataset};
use crate::types::TrialRecord;
use crate::{Error, Result};

/// Default share of trials used for fitting; 0.8 is the other common choice.
pub const DEFAULT_SPLIT_FRACTION: f64 = 0.75;

/// The eight per-family metrics, train then held-out where both exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMetrics {
    pub aic: f64,
    pub bic: f64,
    pub concordance: f64,
    pub test_concordance: f64,
    pub ici: f64,
    pub test_ici: f64,
    pub e50: f64,
    pub test_e50: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub family: Family,
    pub model: Option<AftModel>,
    pub metrics: Option<FamilyMetrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub n_fit_trials: usize,
    pub n_test_trials: usize,
}

/// Indices of the fit and held-out trials. Shuffles whole trials, so no rows
/// of one trial land on both sides.
pub fn split_trials(n: usize, split_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("split fraction must be in (0, 1), got {split_fraction}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = (split_fraction * n as f64).round() as usize;
    let mut fit = idx[..k].to_vec();
    let mut test = idx[k..].to_vec();
    fit.sort_unstable();
    test.sort_unstable();
    Ok((fit, test))
}

/// Fit all three families on a seeded trial split and score each on both
/// sides. A family that fails keeps its row with the error message.
pub fn compare_families(trials: &[TrialRecord], split_fraction: f64, seed: u64) -> Result<ComparisonTable> {
    compare_families_with(trials, split_fraction, seed, &FitOptions::default())
}

pub fn compare_families_with(
    trials: &[TrialRecord],
    split_fraction: f64,
    seed: u64,
    opts: &FitOptions,
) -> Result<ComparisonTable> {
    let ok: Vec<&TrialRecord> = trials.iter().filter(|t| t.is_ok()).collect();
    let (fit_idx, test_idx) = split_trials(ok.len(), split_fraction, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| ok[i].clone()).collect::<Vec<_>>();
    let fit_trials = pick(&fit_idx);
    let test_trials = pick(&test_idx);
    let fit = build_survival_dataset(&fit_trials)?;
    let test = build_survival_dataset_like(&test_trials, &fit)?;
    if fit.n_events() == 0 || test.n_events() == 0 {
        return Err(Error::Data(format!(
            "both splits need events: fit has {}, held-out has {}",
            fit.n_events(),
            test.n_events()
        )));
    }

    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = Family::ALL
            .iter()
            .map(|&family| {
                let (fit, test) = (&fit, &test);
                s.spawn(move || family_row(family, fit, test, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("family fit thread panicked"))
            .collect()
    });
    Ok(ComparisonTable {
        rows,
        n_fit_trials: fit_trials.len(),
        n_test_trials: test_trials.len(),
    })
}

fn family_row(family: Family, fit: &SurvivalDataset, test: &SurvivalDataset, opts: &FitOptions) -> ComparisonRow {
    let scored = fit_aft(fit, family, opts).and_then(|model| {
        let ic = information_criteria(&model, fit)?;
        let train_cal = calibration_metrics(&model, fit, fit, None)?;
        let test_cal = calibration_metrics(&model, fit, test, None)?;
        let metrics = FamilyMetrics {
            aic: ic.aic,
            bic: ic.bic,
            concordance: concordance(&model, fit)?,
            test_concordance: concordance(&model, test)?,
            ici: train_cal.ici,
            test_ici: test_cal.ici,
            e50: train_cal.e50,
            test_e50: test_cal.e50,
        };
        Ok((model, metrics))
    });
    match scored {
        Ok((model, metrics)) => ComparisonRow {
            family,
            model: Some(model),
            metrics: Some(metrics),
            error: None,
        },
        Err(e) => {
            log::warn!("{family} failed: {e}");
            ComparisonRow {
                family,
                model: None,
                metrics: None,
                error: Some(e.to_string()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_a_seeded_partition() {
        let (a, b) = split_trials(20, 0.75, 3).unwrap();
        assert_eq!((a.len(), b.len()), (15, 5));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert_eq!(split_trials(20, 0.75, 3).unwrap(), (a.clone(), b));
        assert_ne!(split_trials(20, 0.75, 4).unwrap().0, a);
        assert!(split_trials(20, 1.0, 3).is_err());
    }
}
