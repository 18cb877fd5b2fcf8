//! One-hidden-layer tanh classifier with a softmax cross-entropy loss, trained
//! by plain mini-batch SGD.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub const DEFAULT_HIDDEN_WIDTH: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Floating-point work performed by a forward/backward pass, used by the
/// simulated clock.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Work {
    pub flops: f64,
    pub calls: u64,
}

impl std::ops::AddAssign for Work {
    fn add_assign(&mut self, rhs: Self) {
        self.flops += rhs.flops;
        self.calls += rhs.calls;
    }
}

struct Forward {
    hidden: Array2<f64>,
    probs: Array2<f64>,
    loss_sum: f64,
}

pub struct Gradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub loss: f64,
}

impl ClassifierParams {
    /// Xavier-uniform weights and zero biases.
    pub fn init(n_inputs: usize, hidden: usize, n_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xavier = |fan_in: usize, fan_out: usize| {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-a..=a))
        };
        let w1 = xavier(n_inputs, hidden);
        let w2 = xavier(hidden, n_classes);
        Self {
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: Array1::zeros(n_classes),
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.w2.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).all(|v| v.is_finite())
    }

    fn check_shapes(&self, x: ArrayView2<f64>, y: Option<&[usize]>) -> Result<()> {
        if x.ncols() != self.n_inputs() {
            return Err(Error::InvalidArgument(format!(
                "expected {} features, got {}",
                self.n_inputs(),
                x.ncols()
            )));
        }
        if let Some(y) = y {
            if y.len() != x.nrows() {
                return Err(Error::InvalidArgument(format!(
                    "{} rows but {} labels",
                    x.nrows(),
                    y.len()
                )));
            }
            if let Some(&bad) = y.iter().find(|&&k| k >= self.n_classes()) {
                return Err(Error::InvalidArgument(format!(
                    "label {bad} out of range for {} classes",
                    self.n_classes()
                )));
            }
        }
        Ok(())
    }

    fn forward(&self, x: ArrayView2<f64>, y: Option<&[usize]>) -> Forward {
        let mut hidden = x.dot(&self.w1) + &self.b1;
        hidden.mapv_inplace(f64::tanh);
        let mut probs = hidden.dot(&self.w2) + &self.b2;
        let mut loss_sum = 0.0;
        for (i, mut row) in probs.axis_iter_mut(Axis(0)).enumerate() {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            if let Some(y) = y {
                loss_sum += lse - row[y[i]];
            }
            row.mapv_inplace(|v| (v - lse).exp());
        }
        Forward {
            hidden,
            probs,
            loss_sum,
        }
    }

    pub fn forward_work(&self, rows: usize) -> Work {
        let per_row = 2.0 * (self.n_inputs() * self.hidden() + self.hidden() * self.n_classes()) as f64;
        Work {
            flops: per_row * rows as f64,
            calls: 1,
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        self.check_shapes(x, None)?;
        let fwd = self.forward(x, None);
        Ok(fwd
            .probs
            .axis_iter(Axis(0))
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
                    .0
            })
            .collect())
    }

    /// Mean cross-entropy over the rows of `x`.
    pub fn loss(&self, x: ArrayView2<f64>, y: &[usize]) -> Result<f64> {
        self.check_shapes(x, Some(y))?;
        if y.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        Ok(self.forward(x, Some(y)).loss_sum / y.len() as f64)
    }

    /// Gradient of the mean batch loss with respect to every parameter.
    pub fn gradients(&self, x: ArrayView2<f64>, y: &[usize]) -> Result<Gradients> {
        self.check_shapes(x, Some(y))?;
        let b = y.len() as f64;
        let fwd = self.forward(x, Some(y));
        let mut dz2 = fwd.probs;
        for (i, mut row) in dz2.axis_iter_mut(Axis(0)).enumerate() {
            row[y[i]] -= 1.0;
        }
        dz2.mapv_inplace(|v| v / b);
        let w2 = fwd.hidden.t().dot(&dz2);
        let b2 = dz2.sum_axis(Axis(0));
        let mut dz1 = dz2.dot(&self.w2.t());
        Zip::from(&mut dz1).and(&fwd.hidden).for_each(|d, &a| *d *= 1.0 - a * a);
        let w1 = x.t().dot(&dz1);
        let b1 = dz1.sum_axis(Axis(0));
        Ok(Gradients {
            w1,
            b1,
            w2,
            b2,
            loss: fwd.loss_sum / b,
        })
    }

    /// Gradient of each row's own loss `L(y_i, K(x_i))` with respect to `x_i`.
    pub fn input_gradient(&self, x: ArrayView2<f64>, y: &[usize]) -> Result<Array2<f64>> {
        self.check_shapes(x, Some(y))?;
        let fwd = self.forward(x, Some(y));
        let mut dz2 = fwd.probs;
        for (i, mut row) in dz2.axis_iter_mut(Axis(0)).enumerate() {
            row[y[i]] -= 1.0;
        }
        let mut dz1 = dz2.dot(&self.w2.t());
        Zip::from(&mut dz1).and(&fwd.hidden).for_each(|d, &a| *d *= 1.0 - a * a);
        Ok(dz1.dot(&self.w1.t()))
    }

    fn step(&mut self, g: &Gradients, lr: f64) {
        self.w1.scaled_add(-lr, &g.w1);
        self.b1.scaled_add(-lr, &g.b1);
        self.w2.scaled_add(-lr, &g.w2);
        self.b2.scaled_add(-lr, &g.b2);
    }
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ClassifierParams,
    /// Number of mini-batch updates, always `ceil(n / batch_size) * epochs`.
    pub updates: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub work: Work,
}

/// Mini-batch SGD, reshuffling every epoch. Deterministic in `seed`.
pub fn sgd(
    x: ArrayView2<f64>,
    y: &[usize],
    n_classes: usize,
    hidden: usize,
    learning_rate: f64,
    batch_size: usize,
    epochs: usize,
    seed: u64,
) -> Result<TrainOutcome> {
    if x.nrows() == 0 || x.nrows() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "training set has {} rows and {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if batch_size == 0 || epochs == 0 || !(learning_rate >= 0.0 && learning_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "invalid SGD settings: lr {learning_rate}, batch {batch_size}, epochs {epochs}"
        )));
    }
    let mut params = ClassifierParams::init(x.ncols(), hidden, n_classes, seed);
    params.check_shapes(x, Some(y))?;
    let initial_loss = params.loss(x, y)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut updates = 0;
    let mut work = Work::default();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch_size) {
            let xb = x.select(Axis(0), chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let g = params.gradients(xb.view(), &yb)?;
            if !g.loss.is_finite() {
                return Err(Error::Divergence { step: updates });
            }
            params.step(&g, learning_rate);
            updates += 1;
            let fwd = params.forward_work(chunk.len());
            work += Work {
                flops: 3.0 * fwd.flops,
                calls: 1,
            };
        }
    }
    if !params.is_finite() {
        return Err(Error::Divergence { step: updates });
    }
    let final_loss = params.loss(x, y)?;
    if !final_loss.is_finite() {
        return Err(Error::Divergence { step: updates });
    }
    Ok(TrainOutcome {
        params,
        updates,
        initial_loss,
        final_loss,
        work,
    })
}

/// Fraction of rows whose predicted class equals the label.
pub fn evaluate_accuracy(params: &ClassifierParams, features: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate accuracy on an empty set".into()));
    }
    params.check_shapes(features, Some(labels))?;
    let predicted = params.predict(features)?;
    let wrong = predicted.iter().zip(labels).filter(|(p, y)| p != y).count();
    Ok(1.0 - wrong as f64 / labels.len() as f64)
}
