use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_ATTACK_SIZE: usize = 100;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Isotropic Gaussian clusters with centers drawn uniformly from
    /// `[-center_box, center_box]^d`, kept at least `6 * cluster_std` apart
    /// whenever the box allows it.
    GaussianBlobs { cluster_std: f64, center_box: f64 },
}

impl Default for Generator {
    fn default() -> Self {
        Generator::GaussianBlobs {
            cluster_std: 1.0,
            center_box: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub seed: u64,
    pub n_classes: usize,
    pub n_dims: usize,
    pub n_samples: usize,
    #[serde(default)]
    pub generator: Generator,
    #[serde(default = "default_attack_size")]
    pub attack_size: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_attack_size() -> usize {
    DEFAULT_ATTACK_SIZE
}

fn default_train_fraction() -> f64 {
    DEFAULT_TRAIN_FRACTION
}

impl DatasetSpec {
    pub fn blobs(seed: u64, n_classes: usize, n_dims: usize, n_samples: usize) -> Self {
        Self {
            seed,
            n_classes,
            n_dims,
            n_samples,
            generator: Generator::default(),
            attack_size: DEFAULT_ATTACK_SIZE,
            train_fraction: DEFAULT_TRAIN_FRACTION,
        }
    }
}

/// A standardized classification dataset with train/test/attack index splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub attack: Vec<usize>,
    attack_size: usize,
    train_fraction: f64,
}

/// Generate a dataset, center and scale every column, and split it using `spec.seed`.
pub fn make_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.n_dims < 1 {
        return Err(Error::InvalidArgument("n_dims must be at least 1".into()));
    }
    if spec.n_classes < 2 {
        return Err(Error::InvalidArgument("n_classes must be at least 2".into()));
    }
    if spec.n_samples < 10 * spec.n_classes {
        return Err(Error::InvalidArgument(format!(
            "n_samples = {} is below 10 * n_classes = {}",
            spec.n_samples,
            10 * spec.n_classes
        )));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction {} not in (0, 1)",
            spec.train_fraction
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut features, labels) = match spec.generator {
        Generator::GaussianBlobs {
            cluster_std,
            center_box,
        } => {
            if !(cluster_std > 0.0 && center_box > 0.0) {
                return Err(Error::InvalidArgument(
                    "cluster_std and center_box must be positive".into(),
                ));
            }
            gaussian_blobs(&mut rng, spec, cluster_std, center_box)
        }
    };
    standardize_columns(&mut features);

    let mut data = Dataset {
        features,
        labels,
        n_classes: spec.n_classes,
        train: Vec::new(),
        test: Vec::new(),
        attack: Vec::new(),
        attack_size: spec.attack_size,
        train_fraction: spec.train_fraction,
    };
    data.resplit(spec.seed)?;
    Ok(data)
}

fn gaussian_blobs(
    rng: &mut ChaCha8Rng,
    spec: &DatasetSpec,
    cluster_std: f64,
    center_box: f64,
) -> (Array2<f64>, Vec<usize>) {
    const TRIES: usize = 1000;
    let min_sep = 6.0 * cluster_std;
    let d = spec.n_dims;

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.n_classes);
    for _ in 0..spec.n_classes {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..TRIES {
            let c: Vec<f64> = (0..d)
                .map(|_| rng.random_range(-center_box..=center_box))
                .collect();
            let nearest = centers
                .iter()
                .map(|o| euclidean(o, &c))
                .fold(f64::INFINITY, f64::min);
            let better = best.as_ref().map_or(true, |(b, _)| nearest > *b);
            if better {
                best = Some((nearest, c));
            }
            if nearest >= min_sep {
                break;
            }
        }
        centers.push(best.expect("at least one try").1);
    }

    let noise = Normal::new(0.0, cluster_std).expect("positive std");
    let mut features = Array2::zeros((spec.n_samples, d));
    let mut labels = Vec::with_capacity(spec.n_samples);
    for (i, mut row) in features.axis_iter_mut(Axis(0)).enumerate() {
        let k = i % spec.n_classes;
        for (j, v) in row.iter_mut().enumerate() {
            *v = centers[k][j] + noise.sample(rng);
        }
        labels.push(k);
    }
    (features, labels)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Center every column to mean zero and scale it to unit (population) standard deviation.
/// Constant columns are only centered.
pub fn standardize_columns(features: &mut Array2<f64>) {
    let n = features.nrows() as f64;
    for mut col in features.axis_iter_mut(Axis(1)) {
        let mean = col.sum() / n;
        col.mapv_inplace(|v| v - mean);
        let std = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        if std > 0.0 {
            col.mapv_inplace(|v| v / std);
        }
        // second pass removes the rounding residue of the first subtraction
        let residue = col.sum() / n;
        col.mapv_inplace(|v| v - residue);
    }
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_dims(&self) -> usize {
        self.features.ncols()
    }

    /// Reshuffle the train/test/attack split with `random_state`; the data itself is untouched.
    ///
    /// `train_fraction` of the rows train the model. The held-out rest is divided
    /// into an attack split of `attack_size` rows (at most half the held-out rows)
    /// and a disjoint test split.
    pub fn resplit(&mut self, random_state: u64) -> Result<()> {
        let n = self.n_samples();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(random_state ^ 0x5eed_5b11_7000_0000));
        let n_train = ((n as f64) * self.train_fraction).round() as usize;
        let held_out = n.saturating_sub(n_train);
        if n_train == 0 || held_out < 2 {
            return Err(Error::InvalidArgument(format!(
                "cannot split {n} samples with train fraction {}",
                self.train_fraction
            )));
        }
        let n_attack = self.attack_size.min(held_out / 2).max(1);
        self.train = order[..n_train].to_vec();
        self.attack = order[n_train..n_train + n_attack].to_vec();
        self.test = order[n_train + n_attack..].to_vec();
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> (Array2<f64>, Vec<usize>) {
        (
            self.features.select(Axis(0), idx),
            idx.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }
}
