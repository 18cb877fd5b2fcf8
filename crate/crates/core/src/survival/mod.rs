//! Censored survival data from trials and accelerated failure time models.

pub mod data;
pub mod family;
pub mod fit;
pub(crate) mod likelihood;
pub mod model;
pub(crate) mod newton;
pub mod quadrature;
pub mod simulate;

pub use data::{
    build_survival_dataset, build_survival_dataset_like, CovariateTransform, SurvivalDataset, TrialSchema,
    TRIAL_COVARIATES,
};
pub use family::Family;
pub use fit::{fit_aft, FitOptions};
pub use model::{log_likelihood, AftModel, FitDiagnostics};
pub use simulate::{simulate_aft, Simulation};
