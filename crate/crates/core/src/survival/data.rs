//! Right-censored observations and the covariate layout derived from trials.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::types::TrialRecord;
use crate::{Error, Result};

/// Per-column affine map `(x - mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateTransform {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl CovariateTransform {
    /// Column means and population standard deviations; constant columns get
    /// scale 1 so they standardize to zero.
    pub fn fit(raw: &Array2<f64>) -> Self {
        let n = raw.nrows().max(1) as f64;
        let mut means = Vec::with_capacity(raw.ncols());
        let mut scales = Vec::with_capacity(raw.ncols());
        for col in raw.axis_iter(Axis(1)) {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            means.push(mean);
            scales.push(if sd > 1e-12 * mean.abs().max(1.0) { sd } else { 1.0 });
        }
        Self { means, scales }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            means: vec![0.0; p],
            scales: vec![1.0; p],
        }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn apply(&self, raw: &Array2<f64>) -> Array2<f64> {
        let mut out = raw.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - self.means[j]) / self.scales[j]);
        }
        out
    }

    pub fn apply_row(&self, raw: ArrayView1<f64>) -> Array1<f64> {
        Array1::from_iter(raw.iter().enumerate().map(|(j, v)| (v - self.means[j]) / self.scales[j]))
    }

    pub fn invert_row(&self, std: ArrayView1<f64>) -> Array1<f64> {
        Array1::from_iter(std.iter().enumerate().map(|(j, v)| v * self.scales[j] + self.means[j]))
    }
}

/// Rows of `(time, event, covariates)`. Raw covariates are kept alongside the
/// standardized ones and the transform that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    schema: Vec<String>,
    times: Vec<f64>,
    events: Vec<bool>,
    raw: Array2<f64>,
    standardized: Array2<f64>,
    transform: CovariateTransform,
}

impl SurvivalDataset {
    /// Validate the rows and fit a standardizing transform on them.
    pub fn new(schema: Vec<String>, times: Vec<f64>, events: Vec<bool>, raw: Array2<f64>) -> Result<Self> {
        let transform = CovariateTransform::fit(&raw);
        Self::with_transform(schema, times, events, raw, transform)
    }

    /// Validate the rows and standardize them with an existing transform.
    pub fn with_transform(
        schema: Vec<String>,
        times: Vec<f64>,
        events: Vec<bool>,
        raw: Array2<f64>,
        transform: CovariateTransform,
    ) -> Result<Self> {
        if times.len() != events.len() || times.len() != raw.nrows() {
            return Err(Error::InvalidArgument(format!(
                "row count mismatch: {} times, {} events, {} covariate rows",
                times.len(),
                events.len(),
                raw.nrows()
            )));
        }
        if schema.len() != raw.ncols() || transform.len() != raw.ncols() {
            return Err(Error::InvalidArgument(format!(
                "schema has {} names, transform {} columns, covariates {} columns",
                schema.len(),
                transform.len(),
                raw.ncols()
            )));
        }
        if let Some(row) = times.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Data(format!("row {row}: survival time must be > 0, got {}", times[row])));
        }
        if let Some((row, _)) = raw.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Data(format!("row {}: covariate {} is not finite", row.0, schema[row.1])));
        }
        let standardized = transform.apply(&raw);
        Ok(Self {
            schema,
            times,
            events,
            raw,
            standardized,
            transform,
        })
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn raw(&self) -> &Array2<f64> {
        &self.raw
    }

    pub fn standardized(&self) -> &Array2<f64> {
        &self.standardized
    }

    pub fn transform(&self) -> &CovariateTransform {
        &self.transform
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_covariates(&self) -> usize {
        self.schema.len()
    }

    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|e| **e).count()
    }

    pub fn max_time(&self) -> Option<f64> {
        self.times.iter().copied().reduce(f64::max)
    }

    /// Median of all observed times, censored or not.
    pub fn median_time(&self) -> Option<f64> {
        if self.times.is_empty() {
            return None;
        }
        let mut t = self.times.clone();
        t.sort_by(f64::total_cmp);
        let n = t.len();
        Some(if n % 2 == 1 { t[n / 2] } else { 0.5 * (t[n / 2 - 1] + t[n / 2]) })
    }

    /// The rows at `idx` in that order, keeping this dataset's transform.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            times: idx.iter().map(|&i| self.times[i]).collect(),
            events: idx.iter().map(|&i| self.events[i]).collect(),
            raw: self.raw.select(Axis(0), idx),
            standardized: self.standardized.select(Axis(0), idx),
            transform: self.transform.clone(),
        }
    }
}

/// Fixed trial covariates, followed by dummy columns for every non-reference
/// dataset and hardware tag.
pub const TRIAL_COVARIATES: [&str; 7] = [
    "epsilon",
    "t_train_per_sample",
    "t_predict_per_sample",
    "acc_benign",
    "log_batch_size",
    "epochs",
    "random_state",
];

/// Tag levels seen when the schema was built. The first level of each tag is
/// the reference and has no column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSchema {
    pub dataset_levels: Vec<String>,
    pub hardware_levels: Vec<String>,
}

impl TrialSchema {
    /// Sorted distinct tags of the successful trials.
    pub fn from_trials(trials: &[TrialRecord]) -> Self {
        let levels = |f: fn(&TrialRecord) -> &String| {
            let mut v: Vec<String> = trials.iter().filter(|t| t.is_ok()).map(|t| f(t).clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        Self {
            dataset_levels: levels(|t| &t.dataset_tag),
            hardware_levels: levels(|t| &t.hardware_tag),
        }
    }

    /// Recover the tag levels from column names. Reference levels are not
    /// recoverable and are reported as empty strings.
    pub fn from_names(names: &[String]) -> Result<Self> {
        let fixed = TRIAL_COVARIATES.len();
        if names.len() < fixed || names[..fixed].iter().zip(TRIAL_COVARIATES).any(|(a, b)| a != b) {
            return Err(Error::Data(format!(
                "covariate schema does not start with the trial covariates {TRIAL_COVARIATES:?}"
            )));
        }
        let mut schema = Self {
            dataset_levels: vec![String::new()],
            hardware_levels: vec![String::new()],
        };
        for name in &names[fixed..] {
            if let Some(tag) = name.strip_prefix("dataset=") {
                schema.dataset_levels.push(tag.to_string());
            } else if let Some(tag) = name.strip_prefix("hardware=") {
                schema.hardware_levels.push(tag.to_string());
            } else {
                return Err(Error::Data(format!("unrecognized covariate column {name:?}")));
            }
        }
        Ok(schema)
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = TRIAL_COVARIATES.iter().map(|s| s.to_string()).collect();
        names.extend(self.dataset_levels.iter().skip(1).map(|l| format!("dataset={l}")));
        names.extend(self.hardware_levels.iter().skip(1).map(|l| format!("hardware={l}")));
        names
    }

    /// Raw covariate row of one trial. Unseen tags map to the reference level.
    pub fn row(&self, t: &TrialRecord) -> Vec<f64> {
        let mut row = vec![
            t.epsilon,
            t.train_time_per_sample(),
            t.predict_time_per_sample(),
            t.acc_benign,
            (t.hyperparams.batch_size as f64).ln(),
            t.hyperparams.epochs as f64,
            t.random_state as f64,
        ];
        row.extend(self.dataset_levels.iter().skip(1).map(|l| f64::from(u8::from(*l == t.dataset_tag))));
        row.extend(self.hardware_levels.iter().skip(1).map(|l| f64::from(u8::from(*l == t.hardware_tag))));
        row
    }
}

/// Expand each successful trial into `n_attack` rows at `t_a = T_a / n_attack`:
/// the failures are events, the survivors are censored at `t_a`. Failed trials
/// are skipped.
pub fn build_survival_dataset(trials: &[TrialRecord]) -> Result<SurvivalDataset> {
    let schema = TrialSchema::from_trials(trials);
    let (names, times, events, raw) = expand(trials, &schema)?;
    SurvivalDataset::new(names, times, events, raw)
}

/// Like [`build_survival_dataset`] but with another dataset's columns and
/// transform, for evaluating a fitted model on held-out trials.
pub fn build_survival_dataset_like(trials: &[TrialRecord], reference: &SurvivalDataset) -> Result<SurvivalDataset> {
    let schema = TrialSchema::from_names(reference.schema())?;
    let (names, times, events, raw) = expand(trials, &schema)?;
    SurvivalDataset::with_transform(names, times, events, raw, reference.transform().clone())
}

type Expanded = (Vec<String>, Vec<f64>, Vec<bool>, Array2<f64>);

fn expand(trials: &[TrialRecord], schema: &TrialSchema) -> Result<Expanded> {
    let names = schema.names();
    let p = names.len();
    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut flat = Vec::new();
    for t in trials.iter().filter(|t| t.is_ok()) {
        if t.n_attack == 0 {
            return Err(Error::Data(format!("trial {}: n_attack is 0", t.trial_id)));
        }
        let time = t.attack_time_per_sample();
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::Data(format!(
                "trial {}: attack time per sample must be > 0, got {time}",
                t.trial_id
            )));
        }
        let row = schema.row(t);
        let failures = t.failures();
        for k in 0..t.n_attack {
            times.push(time);
            events.push(k < failures);
            flat.extend_from_slice(&row);
        }
    }
    let n = times.len();
    let raw = Array2::from_shape_vec((n, p), flat).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok((names, times, events, raw))
}
