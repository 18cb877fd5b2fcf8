//! Desk-scale stand-in for GPU experiments: synthetic data, a small classifier
//! trained by SGD, the fast gradient method, and timed trials.

pub mod attack;
pub mod classifier;
pub mod clock;
pub mod dataset;
pub mod trial;

pub use attack::{fgm_attack, fgm_attack_with, squeeze_features, AttackConfig, SqueezeDefence, DEFAULT_EPSILON_GRID};
pub use classifier::{evaluate_accuracy, sgd, ClassifierParams, TrainOutcome, Work, DEFAULT_HIDDEN_WIDTH};
pub use clock::{Clock, SimulatedClock};
pub use dataset::{make_dataset, Dataset, DatasetSpec, Generator};
pub use trial::{failed_trial, run_trial, train_classifier, TrialSeeds, TrialSetup};
