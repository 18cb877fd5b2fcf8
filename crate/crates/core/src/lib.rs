//! Survival analysis of adversarial robustness.
//!
//! Trials train a small classifier, attack it with the fast gradient method and
//! record how long each phase took. The induced failures become right-censored
//! survival observations, accelerated failure time (AFT) models are fit to them
//! and compared, and the fitted expected survival time feeds a cost, energy and
//! TRASH-score analysis across hardware profiles.
//!
//! ```no_run
//! use advsurv::lab::{make_dataset, DatasetSpec};
//! use advsurv::optimizer::{run_study, StudyConfig};
//! use advsurv::selection::compare_families;
//!
//! # fn main() -> advsurv::Result<()> {
//! let config = StudyConfig::desk_default(DatasetSpec::blobs(0, 3, 2, 1000));
//! let study = run_study(&config, None)?;
//! let table = compare_families(&study.records, 0.75, 7)?;
//! for row in &table.rows {
//!     println!("{:?}: AIC {:?}", row.family, row.metrics.map(|m| m.aic));
//! }
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod costing;
pub mod error;
pub mod io;
pub mod lab;
pub mod optimizer;
pub mod selection;
pub mod survival;
pub mod types;

pub use error::{Error, Result};
pub use types::{validate_trial, HardwareProfile, HyperParams, TrialRecord, TrialStatus, Violation};
