//! Import trial results kept by other tools as comma-separated files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::types::{validate_trial, HyperParams, TrialRecord, TrialStatus};
use crate::{Error, Result};

/// Record fields that must come from a column.
pub const REQUIRED_FIELDS: [&str; 13] = [
    "random_state",
    "learning_rate",
    "batch_size",
    "epochs",
    "epsilon",
    "n_train",
    "n_test",
    "n_attack",
    "t_train_total",
    "t_predict_total",
    "t_attack_total",
    "acc_benign",
    "acc_adv",
];

/// Fields filled with a default when their column is absent.
pub const OPTIONAL_FIELDS: [&str; 4] = ["trial_id", "dataset_tag", "hardware_tag", "bit_depth"];

/// Tag used for `dataset_tag` / `hardware_tag` when the file has none.
pub const EXTERNAL_TAG: &str = "external";

/// Record field to CSV column name. Unmapped fields use their own name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColumnMap {
    overrides: BTreeMap<String, String>,
}

impl ColumnMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Read `field` from `column`. Unknown field names are rejected.
    pub fn map(&mut self, field: &str, column: &str) -> Result<&mut Self> {
        if !REQUIRED_FIELDS.contains(&field) && !OPTIONAL_FIELDS.contains(&field) {
            return Err(Error::InvalidArgument(format!("unknown trial field {field:?}")));
        }
        self.overrides.insert(field.into(), column.into());
        Ok(self)
    }

    /// Parse `field=column` pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Self> {
        let mut m = Self::new();
        for p in pairs {
            let (field, column) = p
                .as_ref()
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected field=column, got {:?}", p.as_ref())))?;
            m.map(field.trim(), column.trim())?;
        }
        Ok(m)
    }

    pub fn column<'a>(&'a self, field: &'a str) -> &'a str {
        self.overrides.get(field).map(String::as_str).unwrap_or(field)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    /// 1-based line in the file, header included.
    pub line: u64,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Import {
    pub records: Vec<TrialRecord>,
    pub rejected: Vec<RejectedRow>,
}

/// Read a CSV with a header row into trial records. A mapped column that is
/// missing from the header fails the whole import; a row that does not parse
/// or validate is collected in `rejected` and the rest are kept.
pub fn import_external_csv(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<Import> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    import_csv_reader(file, columns)
}

pub fn import_csv_reader<R: std::io::Read>(reader: R, columns: &ColumnMap) -> Result<Import> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let index_of = |field: &str| header.iter().position(|h| h == columns.column(field));

    let wanted: BTreeSet<&str> = REQUIRED_FIELDS
        .iter()
        .copied()
        .chain(columns.overrides.keys().map(String::as_str))
        .collect();
    let missing: BTreeSet<String> = wanted
        .into_iter()
        .filter(|f| index_of(f).is_none())
        .map(|f| columns.column(f).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing.into_iter().collect()));
    }
    let idx: BTreeMap<&str, Option<usize>> = REQUIRED_FIELDS
        .iter()
        .chain(OPTIONAL_FIELDS.iter())
        .map(|f| (*f, index_of(f)))
        .collect();

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(k as u64 + 2);
        match parse_row(&row, &idx, k as u64) {
            Ok(rec) => {
                let v = validate_trial(&rec);
                if v.is_empty() {
                    records.push(rec);
                } else {
                    rejected.push(RejectedRow {
                        line,
                        reasons: v.iter().map(ToString::to_string).collect(),
                    });
                }
            }
            Err(reasons) => rejected.push(RejectedRow { line, reasons }),
        }
    }
    for r in &rejected {
        log::warn!("line {}: rejected: {}", r.line, r.reasons.join("; "));
    }
    Ok(Import { records, rejected })
}

fn parse_row(
    row: &csv::StringRecord,
    idx: &BTreeMap<&str, Option<usize>>,
    index: u64,
) -> Result<TrialRecord, Vec<String>> {
    let cell = |f: &str| idx[f].and_then(|i| row.get(i)).filter(|s| !s.is_empty());
    let mut errors = Vec::new();
    let mut float = |f: &str| -> f64 {
        match cell(f).map(str::parse::<f64>) {
            Some(Ok(v)) => v,
            Some(Err(e)) => {
                errors.push(format!("{f}: {e}"));
                f64::NAN
            }
            None => {
                errors.push(format!("{f}: empty"));
                f64::NAN
            }
        }
    };
    let (lr, eps) = (float("learning_rate"), float("epsilon"));
    let (tt, tp, ta) = (float("t_train_total"), float("t_predict_total"), float("t_attack_total"));
    let (ab, aa) = (float("acc_benign"), float("acc_adv"));

    let mut int = |f: &str, required: bool| -> Option<u64> {
        match cell(f).map(parse_count) {
            Some(Ok(v)) => Some(v),
            Some(Err(e)) => {
                errors.push(format!("{f}: {e}"));
                None
            }
            None => {
                if required {
                    errors.push(format!("{f}: empty"));
                }
                None
            }
        }
    };
    let random_state = int("random_state", true);
    let batch_size = int("batch_size", true);
    let epochs = int("epochs", true);
    let n_train = int("n_train", true);
    let n_test = int("n_test", true);
    let n_attack = int("n_attack", true);
    let trial_id = int("trial_id", false).unwrap_or(index);
    let bit_depth = int("bit_depth", false).map(|b| u32::try_from(b).unwrap_or(u32::MAX));

    if !errors.is_empty() {
        return Err(errors);
    }
    let tag = |f: &str| cell(f).unwrap_or(EXTERNAL_TAG).to_string();
    Ok(TrialRecord {
        trial_id,
        dataset_tag: tag("dataset_tag"),
        hardware_tag: tag("hardware_tag"),
        random_state: random_state.unwrap(),
        hyperparams: HyperParams {
            learning_rate: lr,
            batch_size: batch_size.unwrap(),
            epochs: epochs.unwrap(),
            bit_depth,
        },
        epsilon: eps,
        n_train: n_train.unwrap(),
        n_test: n_test.unwrap(),
        n_attack: n_attack.unwrap(),
        t_train_total: tt,
        t_predict_total: tp,
        t_attack_total: ta,
        acc_benign: ab,
        acc_adv: aa,
        status: TrialStatus::Ok,
        error: None,
    })
}

/// Counts written as `12` or `12.0` are accepted; `12.5` is not.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        Ok(v) => Err(format!("{v} is not a non-negative integer")),
        Err(e) => Err(e.to_string()),
    }
}
