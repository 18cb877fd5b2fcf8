//! Multi-objective hyperparameter search: TPE suggestions, Pareto utilities,
//! hypervolume, and the study loop that runs trials.

pub mod hypervolume;
pub mod pareto;
pub mod space;
pub mod study;
pub mod tpe;

pub use hypervolume::hypervolume;
pub use pareto::{dominates, non_dominated_ranks, pareto_front, split_by_dominance};
pub use space::{Domain, ParamSpec, SearchSpace};
pub use study::{objectives, run_study, StudyConfig, StudyOutcome};
pub use tpe::{minimize, suggest, Observation, TpeConfig};

/// Per-trial seed derived from a study seed (SplitMix64 finalizer).
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
