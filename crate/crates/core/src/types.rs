//! Shared domain types: trial records, hyperparameters and hardware profiles.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Bit depths accepted by the feature-squeezing defence.
pub const BIT_DEPTHS: [u32; 5] = [4, 8, 16, 32, 64];

pub const LEARNING_RATE_BOUNDS: (f64, f64) = (1e-6, 1.0);
pub const BATCH_SIZE_BOUNDS: (u64, u64) = (1, 100_000);
pub const EPOCH_BOUNDS: (u64, u64) = (1, 100);

/// Absolute slack (per attacked sample) allowed when recovering an integer
/// survivor count from `acc_adv * n_attack`.
pub const SURVIVOR_ROUNDING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub learning_rate: f64,
    pub batch_size: u64,
    pub epochs: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_depth: Option<u32>,
}

impl HyperParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (lo, hi) = LEARNING_RATE_BOUNDS;
        if !(self.learning_rate >= lo && self.learning_rate <= hi) {
            out.push(Violation::HyperParam {
                field: "learning_rate",
                message: format!("{} not in [{lo}, {hi}]", self.learning_rate),
            });
        }
        let (lo, hi) = BATCH_SIZE_BOUNDS;
        if !(lo..=hi).contains(&self.batch_size) {
            out.push(Violation::HyperParam {
                field: "batch_size",
                message: format!("{} not in [{lo}, {hi}]", self.batch_size),
            });
        }
        let (lo, hi) = EPOCH_BOUNDS;
        if !(lo..=hi).contains(&self.epochs) {
            out.push(Violation::HyperParam {
                field: "epochs",
                message: format!("{} not in [{lo}, {hi}]", self.epochs),
            });
        }
        if let Some(bits) = self.bit_depth {
            if !BIT_DEPTHS.contains(&bits) {
                out.push(Violation::HyperParam {
                    field: "bit_depth",
                    message: format!("{bits} not one of {BIT_DEPTHS:?}"),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    #[default]
    Ok,
    Failed,
}

/// One hyperparameter evaluation: what was trained, how it was attacked, and
/// what it cost in wall-clock time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub dataset_tag: String,
    pub hardware_tag: String,
    pub random_state: u64,
    pub hyperparams: HyperParams,
    pub epsilon: f64,
    pub n_train: u64,
    pub n_test: u64,
    pub n_attack: u64,
    pub t_train_total: f64,
    pub t_predict_total: f64,
    pub t_attack_total: f64,
    pub acc_benign: f64,
    pub acc_adv: f64,
    #[serde(default, skip_serializing_if = "is_ok")]
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn is_ok(status: &TrialStatus) -> bool {
    *status == TrialStatus::Ok
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }

    /// Attacked samples that kept their correct label.
    pub fn survivors(&self) -> u64 {
        (self.acc_adv * self.n_attack as f64).round().max(0.0) as u64
    }

    /// Attacked samples that were driven to a misclassification.
    pub fn failures(&self) -> u64 {
        self.n_attack.saturating_sub(self.survivors())
    }

    /// Training time per sample per epoch, the inverse of `T_t = t_t * n * m`.
    pub fn train_time_per_sample(&self) -> f64 {
        self.t_train_total / (self.n_train as f64 * self.hyperparams.epochs as f64)
    }

    pub fn predict_time_per_sample(&self) -> f64 {
        self.t_predict_total / self.n_test as f64
    }

    pub fn attack_time_per_sample(&self) -> f64 {
        self.t_attack_total / self.n_attack as f64
    }
}

/// A broken [`TrialRecord`] invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite { field: &'static str },
    NegativeTime { field: &'static str, value: f64 },
    AccuracyOutOfRange { field: &'static str, value: f64 },
    ZeroCount { field: &'static str },
    NegativeEpsilon { value: f64 },
    FractionalSurvivors { value: f64 },
    HyperParam { field: &'static str, message: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { field } => write!(f, "non-finite value: {field}"),
            Violation::NegativeTime { field, value } => {
                write!(f, "negative time: {field} = {value}")
            }
            Violation::AccuracyOutOfRange { field, value } => {
                write!(f, "accuracy out of [0,1]: {field} = {value}")
            }
            Violation::ZeroCount { field } => write!(f, "count must be at least 1: {field}"),
            Violation::NegativeEpsilon { value } => write!(f, "negative epsilon: {value}"),
            Violation::FractionalSurvivors { value } => write!(
                f,
                "acc_adv * n_attack = {value} is not an integer survivor count"
            ),
            Violation::HyperParam { field, message } => {
                write!(f, "hyperparameter out of bounds: {field}: {message}")
            }
        }
    }
}

/// Check every [`TrialRecord`] invariant; an empty list means the record is valid.
pub fn validate_trial(rec: &TrialRecord) -> Vec<Violation> {
    let mut out = Vec::new();

    for (field, value) in [
        ("t_train_total", rec.t_train_total),
        ("t_predict_total", rec.t_predict_total),
        ("t_attack_total", rec.t_attack_total),
    ] {
        if !value.is_finite() {
            out.push(Violation::NonFinite { field });
        } else if value < 0.0 {
            out.push(Violation::NegativeTime { field, value });
        }
    }

    for (field, value) in [("acc_benign", rec.acc_benign), ("acc_adv", rec.acc_adv)] {
        if !value.is_finite() {
            out.push(Violation::NonFinite { field });
        } else if !(0.0..=1.0).contains(&value) {
            out.push(Violation::AccuracyOutOfRange { field, value });
        }
    }

    for (field, value) in [
        ("n_train", rec.n_train),
        ("n_test", rec.n_test),
        ("n_attack", rec.n_attack),
    ] {
        if value == 0 {
            out.push(Violation::ZeroCount { field });
        }
    }

    if !rec.epsilon.is_finite() {
        out.push(Violation::NonFinite { field: "epsilon" });
    } else if rec.epsilon < 0.0 {
        out.push(Violation::NegativeEpsilon { value: rec.epsilon });
    }

    if (0.0..=1.0).contains(&rec.acc_adv) && rec.n_attack > 0 {
        let scaled = rec.acc_adv * rec.n_attack as f64;
        if (scaled - scaled.round()).abs() > SURVIVOR_ROUNDING_TOLERANCE * rec.n_attack as f64 {
            out.push(Violation::FractionalSurvivors { value: scaled });
        }
    }

    out.extend(rec.hyperparams.violations());
    out
}

/// Rental price and power draw of one accelerator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub name: String,
    /// USD per hour.
    pub cost_per_hour: f64,
    pub power_watts: f64,
    /// Informational only.
    pub bandwidth_gbps: f64,
}

impl HardwareProfile {
    pub fn new(name: impl Into<String>, cost_per_hour: f64, power_watts: f64, bandwidth_gbps: f64) -> Self {
        Self {
            name: name.into(),
            cost_per_hour,
            power_watts,
            bandwidth_gbps,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (field, v) in [
            ("cost_per_hour", self.cost_per_hour),
            ("power_watts", self.power_watts),
            ("bandwidth_gbps", self.bandwidth_gbps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::Data(format!(
                    "hardware profile {}: {field} must be > 0, got {v}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// The three GPUs of the reference deployment (GCP europe-west4, Dec 2023).
    pub fn reference_profiles() -> Vec<HardwareProfile> {
        vec![
            HardwareProfile::new("V100", 2.55, 250.0, 900.0),
            HardwareProfile::new("P100", 1.60, 250.0, 732.0),
            HardwareProfile::new("L4", 0.81, 72.0, 300.0),
        ]
    }
}
