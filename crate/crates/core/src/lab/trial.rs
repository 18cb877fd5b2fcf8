use ndarray::{concatenate, Array2, Axis};

use super::attack::{fgm_attack_with, AttackConfig, SqueezeDefence};
use super::classifier::{evaluate_accuracy, sgd, ClassifierParams, Work, DEFAULT_HIDDEN_WIDTH};
use super::clock::Clock;
use super::dataset::Dataset;
use crate::types::{HyperParams, TrialRecord, TrialStatus};
use crate::{Error, Result};

/// Identity and architecture of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    pub trial_id: u64,
    pub dataset_tag: String,
    pub hardware_tag: String,
    pub hidden_width: usize,
}

impl TrialSetup {
    pub fn new(trial_id: u64, dataset_tag: impl Into<String>, hardware_tag: impl Into<String>) -> Self {
        Self {
            trial_id,
            dataset_tag: dataset_tag.into(),
            hardware_tag: hardware_tag.into(),
            hidden_width: DEFAULT_HIDDEN_WIDTH,
        }
    }
}

/// `random_state` picks the data split; `model` seeds initialization and
/// batch order. Both are drawn independently of the hyperparameter search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub random_state: u64,
    pub model: u64,
}

/// Train, measure benign accuracy on the test split, attack the attack split
/// with FGM in mini-batches of the training batch size, and record the three
/// phase durations.
pub fn run_trial(
    setup: &TrialSetup,
    data: &Dataset,
    hp: &HyperParams,
    cfg: &AttackConfig,
    seeds: TrialSeeds,
    clock: &Clock,
) -> Result<TrialRecord> {
    if let Some(v) = hp.violations().first() {
        return Err(Error::InvalidArgument(v.to_string()));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {}", cfg.epsilon)));
    }

    let mut data = data.clone();
    data.resplit(seeds.random_state)?;
    let (x_train, y_train) = data.subset(&data.train);
    let (x_test, y_test) = data.subset(&data.test);
    let (x_attack, y_attack) = data.subset(&data.attack);
    let batch = hp.batch_size as usize;
    let key = |phase: u64| seeds.model.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ (phase << 56) ^ setup.trial_id;

    let (trained, t_train_total) = clock.measure(key(1), || {
        let out = sgd(
            x_train.view(),
            &y_train,
            data.n_classes,
            setup.hidden_width,
            hp.learning_rate,
            batch,
            hp.epochs as usize,
            seeds.model,
        )?;
        let work = out.work;
        Ok((out, work))
    })?;
    let params = trained.params;

    let defence = cfg
        .defended_bit_depth
        .or(hp.bit_depth)
        .map(|bits| SqueezeDefence::fit(x_train.view(), bits))
        .transpose()?;
    let view = |x: &Array2<f64>| match &defence {
        Some(d) => d.apply(x.view()),
        None => x.clone(),
    };

    let (predicted, t_predict_total) = clock.measure(key(2), || {
        let mut work = Work::default();
        let mut preds = Vec::with_capacity(y_test.len());
        for chunk in row_chunks(x_test.nrows(), batch) {
            let xb = view(&x_test.select(Axis(0), &chunk));
            preds.extend(params.predict(xb.view())?);
            work += params.forward_work(chunk.len());
        }
        Ok((preds, work))
    })?;
    let acc_benign = accuracy_of(&predicted, &y_test)?;

    let (adversarial, t_attack_total) = clock.measure(key(3), || {
        let mut work = Work::default();
        let mut parts = Vec::new();
        for chunk in row_chunks(x_attack.nrows(), batch) {
            let xb = x_attack.select(Axis(0), &chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| y_attack[i]).collect();
            parts.push(fgm_attack_with(&params, xb.view(), &yb, cfg.epsilon, defence.as_ref())?);
            let fwd = params.forward_work(chunk.len());
            work += Work {
                flops: 3.0 * fwd.flops,
                calls: 1,
            };
        }
        let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
        let adv = concatenate(Axis(0), &views).map_err(|e| Error::Numerical(e.to_string()))?;
        Ok((adv, work))
    })?;
    let acc_adv = evaluate_accuracy(&params, view(&adversarial).view(), &y_attack)?;

    Ok(TrialRecord {
        trial_id: setup.trial_id,
        dataset_tag: setup.dataset_tag.clone(),
        hardware_tag: setup.hardware_tag.clone(),
        random_state: seeds.random_state,
        hyperparams: *hp,
        epsilon: cfg.epsilon,
        n_train: data.train.len() as u64,
        n_test: data.test.len() as u64,
        n_attack: data.attack.len() as u64,
        t_train_total,
        t_predict_total,
        t_attack_total,
        acc_benign,
        acc_adv,
        status: TrialStatus::Ok,
        error: None,
    })
}

/// The record logged for a trial whose training or attack failed.
pub fn failed_trial(
    setup: &TrialSetup,
    data: &Dataset,
    hp: &HyperParams,
    cfg: &AttackConfig,
    seeds: TrialSeeds,
    err: &Error,
) -> TrialRecord {
    TrialRecord {
        trial_id: setup.trial_id,
        dataset_tag: setup.dataset_tag.clone(),
        hardware_tag: setup.hardware_tag.clone(),
        random_state: seeds.random_state,
        hyperparams: *hp,
        epsilon: cfg.epsilon,
        n_train: data.train.len().max(1) as u64,
        n_test: data.test.len().max(1) as u64,
        n_attack: data.attack.len().max(1) as u64,
        t_train_total: 0.0,
        t_predict_total: 0.0,
        t_attack_total: 0.0,
        acc_benign: 0.0,
        acc_adv: 0.0,
        status: TrialStatus::Failed,
        error: Some(err.to_string()),
    }
}

fn row_chunks(n: usize, batch: usize) -> impl Iterator<Item = Vec<usize>> {
    let batch = batch.max(1);
    (0..n).step_by(batch).map(move |start| (start..(start + batch).min(n)).collect())
}

fn accuracy_of(predicted: &[usize], labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate accuracy on an empty set".into()));
    }
    let wrong = predicted.iter().zip(labels).filter(|(p, y)| p != y).count();
    Ok(1.0 - wrong as f64 / labels.len() as f64)
}

/// Convenience for tests and examples: train once and return the parameters.
pub fn train_classifier(
    data: &Dataset,
    hp: &HyperParams,
    hidden_width: usize,
    seed: u64,
    clock: &Clock,
) -> Result<(ClassifierParams, f64)> {
    if let Some(v) = hp.violations().first() {
        return Err(Error::InvalidArgument(v.to_string()));
    }
    let (x, y) = data.subset(&data.train);
    let (out, t) = clock.measure(seed, || {
        let out = sgd(
            x.view(),
            &y,
            data.n_classes,
            hidden_width,
            hp.learning_rate,
            hp.batch_size as usize,
            hp.epochs as usize,
            seed,
        )?;
        let work = out.work;
        Ok((out, work))
    })?;
    Ok((out.params, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::dataset::{make_dataset, DatasetSpec};
    use crate::types::validate_trial;

    fn hp() -> HyperParams {
        HyperParams {
            learning_rate: 0.1,
            batch_size: 32,
            epochs: 5,
            bit_depth: None,
        }
    }

    #[test]
    fn record_is_valid_and_deterministic() {
        let data = make_dataset(&DatasetSpec::blobs(0, 3, 2, 500)).unwrap();
        let setup = TrialSetup::new(1, "blobs", "cpu");
        let seeds = TrialSeeds {
            random_state: 4,
            model: 9,
        };
        let cfg = AttackConfig::new(0.4).unwrap();
        let a = run_trial(&setup, &data, &hp(), &cfg, seeds, &Clock::Monotonic).unwrap();
        let b = run_trial(&setup, &data, &hp(), &cfg, seeds, &Clock::Monotonic).unwrap();
        assert!(validate_trial(&a).is_empty(), "{:?}", validate_trial(&a));
        assert_eq!(a.acc_benign, b.acc_benign);
        assert_eq!(a.acc_adv, b.acc_adv);
        assert_eq!(a.n_train + a.n_test + a.n_attack, 500);
        assert_eq!(a.n_attack, 50);
    }

    #[test]
    fn simulated_clock_makes_records_identical() {
        let data = make_dataset(&DatasetSpec::blobs(0, 3, 2, 500)).unwrap();
        let setup = TrialSetup::new(1, "blobs", "cpu");
        let seeds = TrialSeeds {
            random_state: 4,
            model: 9,
        };
        let clock = Clock::Simulated(Default::default());
        let cfg = AttackConfig::new(0.4).unwrap();
        let a = run_trial(&setup, &data, &hp(), &cfg, seeds, &clock).unwrap();
        let b = run_trial(&setup, &data, &hp(), &cfg, seeds, &clock).unwrap();
        assert_eq!(a, b);
        assert!(a.t_attack_total > 0.0 && a.t_train_total > a.t_attack_total);
    }

    #[test]
    fn fixed_clock_times() {
        let data = make_dataset(&DatasetSpec::blobs(0, 3, 2, 300)).unwrap();
        let rec = run_trial(
            &TrialSetup::new(0, "blobs", "cpu"),
            &data,
            &hp(),
            &AttackConfig::new(0.2).unwrap(),
            TrialSeeds {
                random_state: 0,
                model: 0,
            },
            &Clock::Fixed { seconds: 2.0 },
        )
        .unwrap();
        assert_eq!((rec.t_train_total, rec.t_predict_total, rec.t_attack_total), (2.0, 2.0, 2.0));
    }

    #[test]
    fn defended_trial_runs() {
        let data = make_dataset(&DatasetSpec::blobs(3, 3, 2, 400)).unwrap();
        let mut p = hp();
        p.bit_depth = Some(4);
        let rec = run_trial(
            &TrialSetup::new(0, "blobs", "cpu"),
            &data,
            &p,
            &AttackConfig::new(0.2).unwrap(),
            TrialSeeds {
                random_state: 1,
                model: 1,
            },
            &Clock::Monotonic,
        )
        .unwrap();
        assert!(validate_trial(&rec).is_empty());
    }

    #[test]
    fn out_of_bounds_hyperparams_are_rejected() {
        let data = make_dataset(&DatasetSpec::blobs(0, 3, 2, 300)).unwrap();
        let mut p = hp();
        p.epochs = 0;
        let r = run_trial(
            &TrialSetup::new(0, "blobs", "cpu"),
            &data,
            &p,
            &AttackConfig::new(0.2).unwrap(),
            TrialSeeds {
                random_state: 0,
                model: 0,
            },
            &Clock::Monotonic,
        );
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
