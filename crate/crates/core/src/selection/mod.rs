//! Comparing fitted AFT families: information criteria, concordance and
//! calibration at a fixed horizon.

pub mod calibration;
pub mod compare;
pub mod concordance;
pub mod criteria;
pub mod spline;

pub use calibration::{calibration_metrics, ici_e50, recalibrate, Calibration};
pub use compare::{
    compare_families, compare_families_with, split_trials, ComparisonRow, ComparisonTable, FamilyMetrics,
    DEFAULT_SPLIT_FRACTION,
};
pub use concordance::{concordance, concordance_index};
pub use criteria::{information_criteria, InformationCriteria};
pub use spline::NaturalSpline;
