//! Time aggregation, monetary cost and energy projection, and the TRASH
//! score (training time over expected survival time).
//!
//! `power * seconds` is an energy, so it is reported in joules
//! (`energy_joules`) even where it is informally called power consumption.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::survival::{AftModel, TrialSchema};
use crate::types::{HardwareProfile, TrialRecord};
use crate::{Error, Result};

/// Scores above this are cheaper to break than to train.
pub const TRASH_THRESHOLD: f64 = 1.0;

/// `per_sample * n * m`. Pass `m = 1` for inference and attack times.
pub fn aggregate_times(per_sample: f64, n: u64, m: u64) -> Result<f64> {
    if !(per_sample >= 0.0 && per_sample.is_finite()) {
        return Err(Error::InvalidArgument(format!("per-sample time must be >= 0, got {per_sample}")));
    }
    Ok(per_sample * n as f64 * m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub cost_usd: f64,
    pub energy_joules: f64,
}

/// Rental cost `C_h * hours` and energy `P_h * seconds`.
pub fn project_cost_energy(total_seconds: f64, profile: &HardwareProfile) -> Result<Projection> {
    if !(total_seconds >= 0.0 && total_seconds.is_finite()) {
        return Err(Error::InvalidArgument(format!("seconds must be >= 0, got {total_seconds}")));
    }
    profile.validate()?;
    Ok(Projection {
        cost_usd: profile.cost_per_hour * total_seconds / 3600.0,
        energy_joules: profile.power_watts * total_seconds,
    })
}

/// Look a profile up by name.
pub fn find_profile<'a>(profiles: &'a [HardwareProfile], name: &str) -> Result<&'a HardwareProfile> {
    profiles
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown hardware profile {name:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Robust,
    Broken,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Robust => "robust",
            Verdict::Broken => "broken",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrashScore {
    pub score: f64,
    pub verdict: Verdict,
}

/// `t_train_per_sample / E[T]`; broken when strictly above 1.
pub fn trash_score(t_train_per_sample: f64, expected_survival_time: f64) -> Result<TrashScore> {
    if !(expected_survival_time > 0.0 && expected_survival_time.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "expected survival time must be > 0, got {expected_survival_time}"
        )));
    }
    if !(t_train_per_sample >= 0.0 && t_train_per_sample.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "training time must be >= 0, got {t_train_per_sample}"
        )));
    }
    let score = t_train_per_sample / expected_survival_time;
    Ok(TrashScore {
        score,
        verdict: if score > TRASH_THRESHOLD { Verdict::Broken } else { Verdict::Robust },
    })
}

/// One trial on one hardware profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub trial_id: u64,
    pub profile: String,
    pub t_train_per_sample: f64,
    pub t_predict_per_sample: f64,
    pub t_attack_per_sample: f64,
    pub train_cost_usd: f64,
    pub train_energy_joules: f64,
    pub predict_cost_usd: f64,
    pub predict_energy_joules: f64,
    pub attack_cost_usd: f64,
    pub attack_energy_joules: f64,
    pub expected_survival_time: f64,
    pub trash_score: f64,
    pub verdict: Verdict,
}

/// TRASH score of one trial under a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrashRow {
    pub trial_id: u64,
    pub t_train_per_sample: f64,
    pub expected_survival_time: f64,
    pub trash_score: f64,
    pub verdict: Verdict,
}

/// One row per successful trial, with `E[T]` evaluated at the trial's covariates.
pub fn trash_report(trials: &[TrialRecord], model: &AftModel) -> Result<Vec<TrashRow>> {
    let schema = TrialSchema::from_names(&model.schema)?;
    trials
        .iter()
        .filter(|t| t.is_ok())
        .map(|t| {
            let expected = model.expected_survival_time(&schema.row(t), None)?;
            let t_train = t.train_time_per_sample();
            let trash = trash_score(t_train, expected)?;
            Ok(TrashRow {
                trial_id: t.trial_id,
                t_train_per_sample: t_train,
                expected_survival_time: expected,
                trash_score: trash.score,
                verdict: trash.verdict,
            })
        })
        .collect()
}

/// Cross product of successful trials and profiles. Times are used as
/// measured on every profile; only prices and power differ.
pub fn cost_report(trials: &[TrialRecord], model: &AftModel, profiles: &[HardwareProfile]) -> Result<Vec<CostRow>> {
    for p in profiles {
        p.validate()?;
    }
    let ok: Vec<&TrialRecord> = trials.iter().filter(|t| t.is_ok()).collect();
    let trash = trash_report(trials, model)?;
    let mut rows = Vec::with_capacity(ok.len() * profiles.len());
    for (t, tr) in ok.into_iter().zip(trash) {
        for p in profiles {
            let train = project_cost_energy(t.t_train_total, p)?;
            let predict = project_cost_energy(t.t_predict_total, p)?;
            let attack = project_cost_energy(t.t_attack_total, p)?;
            rows.push(CostRow {
                trial_id: t.trial_id,
                profile: p.name.clone(),
                t_train_per_sample: tr.t_train_per_sample,
                t_predict_per_sample: t.predict_time_per_sample(),
                t_attack_per_sample: t.attack_time_per_sample(),
                train_cost_usd: train.cost_usd,
                train_energy_joules: train.energy_joules,
                predict_cost_usd: predict.cost_usd,
                predict_energy_joules: predict.energy_joules,
                attack_cost_usd: attack.cost_usd,
                attack_energy_joules: attack.energy_joules,
                expected_survival_time: tr.expected_survival_time,
                trash_score: tr.trash_score,
                verdict: tr.verdict,
            });
        }
    }
    Ok(rows)
}
