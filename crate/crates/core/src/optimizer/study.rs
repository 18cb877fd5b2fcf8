use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pareto::pareto_front;
use super::space::SearchSpace;
use super::tpe::{suggest, Observation, TpeConfig};
use crate::lab::{
    failed_trial, make_dataset, run_trial, AttackConfig, Clock, DatasetSpec, SimulatedClock, TrialSeeds, TrialSetup,
    DEFAULT_EPSILON_GRID, DEFAULT_HIDDEN_WIDTH,
};
use crate::types::TrialRecord;
use crate::{Error, Result};

/// Everything a study run depends on. Together with the seed it determines
/// the trial log exactly when the clock is simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_n_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub dataset: DatasetSpec,
    #[serde(default = "default_dataset_tag")]
    pub dataset_tag: String,
    #[serde(default = "default_hardware_tag")]
    pub hardware_tag: String,
    /// Each trial attacks with an epsilon drawn from this grid.
    #[serde(default = "default_epsilon_grid")]
    pub epsilon_grid: Vec<f64>,
    /// Each trial splits the data with a `random_state` drawn from this pool.
    #[serde(default = "default_random_states")]
    pub random_states: Vec<u64>,
    /// Also search over the feature-squeezing bit depth.
    #[serde(default)]
    pub search_bit_depth: bool,
    #[serde(default)]
    pub tpe: TpeConfig,
    #[serde(default = "default_clock")]
    pub clock: Clock,
    #[serde(default = "default_hidden_width")]
    pub hidden_width: usize,
}

fn default_n_trials() -> usize {
    100
}
fn default_dataset_tag() -> String {
    "blobs".into()
}
fn default_hardware_tag() -> String {
    "cpu".into()
}
fn default_epsilon_grid() -> Vec<f64> {
    DEFAULT_EPSILON_GRID.to_vec()
}
fn default_random_states() -> Vec<u64> {
    (0..10).collect()
}
fn default_clock() -> Clock {
    Clock::Simulated(SimulatedClock::default())
}
fn default_hidden_width() -> usize {
    DEFAULT_HIDDEN_WIDTH
}

impl StudyConfig {
    /// 100 trials on `dataset` with the default epsilon grid, ten split
    /// seeds and the simulated clock.
    pub fn desk_default(dataset: DatasetSpec) -> Self {
        Self {
            n_trials: default_n_trials(),
            seed: 0,
            dataset,
            dataset_tag: default_dataset_tag(),
            hardware_tag: default_hardware_tag(),
            epsilon_grid: default_epsilon_grid(),
            random_states: default_random_states(),
            search_bit_depth: false,
            tpe: TpeConfig::default(),
            clock: default_clock(),
            hidden_width: default_hidden_width(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1".into());
        }
        if self.epsilon_grid.is_empty() || self.epsilon_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad(format!("epsilon grid must be non-empty and positive: {:?}", self.epsilon_grid));
        }
        if self.random_states.is_empty() {
            return bad("random_states must not be empty".into());
        }
        if !(self.tpe.gamma > 0.0 && self.tpe.gamma < 1.0) {
            return bad(format!("tpe.gamma must be in (0, 1), got {}", self.tpe.gamma));
        }
        if self.hidden_width == 0 {
            return bad("hidden_width must be at least 1".into());
        }
        Ok(())
    }

    pub fn space(&self) -> SearchSpace {
        SearchSpace::hyperparams(self.search_bit_depth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutcome {
    /// Every trial in execution order, failed ones included.
    pub records: Vec<TrialRecord>,
    /// Indices into `records` of the non-dominated successful trials.
    pub front: Vec<usize>,
}

/// Minimize-all form of a trial's objectives: benign error, adversarial
/// error, total training time.
pub fn objectives(rec: &TrialRecord) -> Vec<f64> {
    vec![1.0 - rec.acc_benign, 1.0 - rec.acc_adv, rec.t_train_total]
}

/// Run the study, handing each record to `sink` as soon as it exists. A
/// failed trial is recorded and skipped; the study aborts once more than
/// half of the planned trials have failed.
pub fn run_study(
    config: &StudyConfig,
    mut sink: Option<&mut dyn FnMut(&TrialRecord) -> Result<()>>,
) -> Result<StudyOutcome> {
    config.validate()?;
    let data = make_dataset(&config.dataset)?;
    let space = config.space();
    let mut draws = ChaCha8Rng::seed_from_u64(super::trial_seed(config.seed, u64::MAX));
    let mut history: Vec<Observation> = Vec::new();
    let mut records = Vec::with_capacity(config.n_trials);
    let mut failures = 0;

    for i in 0..config.n_trials {
        let point = suggest(&history, &space, super::trial_seed(config.seed, i as u64), &config.tpe);
        let hp = space.to_hyperparams(&point)?;
        let epsilon = config.epsilon_grid[draws.random_range(0..config.epsilon_grid.len())];
        let seeds = TrialSeeds {
            random_state: config.random_states[draws.random_range(0..config.random_states.len())],
            model: draws.random(),
        };
        let mut setup = TrialSetup::new(i as u64, config.dataset_tag.clone(), config.hardware_tag.clone());
        setup.hidden_width = config.hidden_width;
        let attack = AttackConfig::new(epsilon)?;

        let rec = match run_trial(&setup, &data, &hp, &attack, seeds, &config.clock) {
            Ok(rec) => {
                history.push(Observation {
                    point,
                    objectives: objectives(&rec),
                });
                rec
            }
            Err(e) => {
                failures += 1;
                log::warn!("trial {i} failed: {e}");
                failed_trial(&setup, &data, &hp, &attack, seeds, &e)
            }
        };
        if let Some(sink) = sink.as_mut() {
            sink(&rec)?;
        }
        records.push(rec);
        if 2 * failures > config.n_trials {
            return Err(Error::Numerical(format!(
                "study aborted: {failures} of {} planned trials failed",
                config.n_trials
            )));
        }
    }

    let ok: Vec<usize> = (0..records.len()).filter(|&i| records[i].is_ok()).collect();
    let points: Vec<Vec<f64>> = ok.iter().map(|&i| objectives(&records[i])).collect();
    let front = pareto_front(&points).into_iter().map(|k| ok[k]).collect();
    Ok(StudyOutcome { records, front })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::pareto::dominates;

    fn small() -> StudyConfig {
        let mut c = StudyConfig::desk_default(DatasetSpec::blobs(1, 3, 2, 300));
        c.n_trials = 10;
        c.tpe.n_startup = 4;
        c
    }

    #[test]
    fn every_trial_is_recorded_and_the_front_is_non_dominated() {
        let mut seen = 0;
        let mut sink = |_: &TrialRecord| {
            seen += 1;
            Ok(())
        };
        let out = run_study(&small(), Some(&mut sink)).unwrap();
        assert_eq!(out.records.len(), 10);
        assert_eq!(seen, 10);
        assert!(!out.front.is_empty());
        for &a in &out.front {
            for &b in &out.front {
                assert!(!dominates(&objectives(&out.records[a]), &objectives(&out.records[b])));
            }
        }
    }

    #[test]
    fn simulated_clock_study_is_reproducible() {
        let a = run_study(&small(), None).unwrap();
        let b = run_study(&small(), None).unwrap();
        assert_eq!(a, b);
        let grid = DEFAULT_EPSILON_GRID;
        assert!(a.records.iter().all(|r| grid.contains(&r.epsilon)));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = small();
        let text = toml::to_string(&c).unwrap();
        let back: StudyConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = small();
        c.epsilon_grid = vec![];
        assert!(run_study(&c, None).is_err());
    }
}
