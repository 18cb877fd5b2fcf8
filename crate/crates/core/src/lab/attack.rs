//! Fast gradient method and the feature-squeezing input defence.

use ndarray::{Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use super::classifier::ClassifierParams;
use crate::types::BIT_DEPTHS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub defended_bit_depth: Option<u32>,
}

impl AttackConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(Self {
            epsilon,
            defended_bit_depth: None,
        })
    }

    pub fn with_defence(mut self, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        self.defended_bit_depth = Some(bits);
        Ok(self)
    }
}

/// Default attack strengths on standardized inputs: (0, 1] in five steps.
pub const DEFAULT_EPSILON_GRID: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

fn check_bits(bits: u32) -> Result<()> {
    if BIT_DEPTHS.contains(&bits) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "unsupported bit depth {bits}; expected one of {BIT_DEPTHS:?}"
        )))
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Per-feature quantization to `2^bits` levels over a fixed value range.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeDefence {
    pub bits: u32,
    pub ranges: Vec<(f64, f64)>,
}

impl SqueezeDefence {
    /// Take the per-feature value range from `features`.
    pub fn fit(features: ArrayView2<f64>, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let ranges = features
            .axis_iter(Axis(1))
            .map(|col| {
                col.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
            })
            .collect();
        Ok(Self { bits, ranges })
    }

    /// Clip into the fitted range, rescale to [0, 1], round to the nearest
    /// level and map back.
    pub fn apply(&self, features: ArrayView2<f64>) -> Array2<f64> {
        let levels = (2f64).powi(self.bits as i32) - 1.0;
        let mut out = features.to_owned();
        for (mut col, &(lo, hi)) in out.axis_iter_mut(Axis(1)).zip(&self.ranges) {
            let span = hi - lo;
            if !(span > 0.0) {
                continue;
            }
            col.mapv_inplace(|v| {
                let unit = ((v - lo) / span).clamp(0.0, 1.0);
                let level = (unit * levels).round();
                // the top level maps to `hi` exactly so a second pass sees the same range
                if level >= levels {
                    hi
                } else {
                    (lo + level / levels * span).min(hi)
                }
            });
        }
        out
    }
}

/// Squeeze `features` to `bits` bits per value, using each column's own range.
pub fn squeeze_features(features: ArrayView2<f64>, bits: u32) -> Result<Array2<f64>> {
    Ok(SqueezeDefence::fit(features, bits)?.apply(features))
}

/// `x_a = x + epsilon * sign(grad_x L(y, K(x)))`, no clipping.
///
/// When the configuration names a defended bit depth, the model sees squeezed
/// inputs; the gradient is then taken at the squeezed point and passed straight
/// through the quantizer.
pub fn fgm_attack(
    params: &ClassifierParams,
    features: ArrayView2<f64>,
    labels: &[usize],
    cfg: &AttackConfig,
) -> Result<Array2<f64>> {
    let defence = cfg
        .defended_bit_depth
        .map(|bits| SqueezeDefence::fit(features, bits))
        .transpose()?;
    fgm_attack_with(params, features, labels, cfg.epsilon, defence.as_ref())
}

pub fn fgm_attack_with(
    params: &ClassifierParams,
    features: ArrayView2<f64>,
    labels: &[usize],
    epsilon: f64,
    defence: Option<&SqueezeDefence>,
) -> Result<Array2<f64>> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let grad = match defence {
        Some(d) => params.input_gradient(d.apply(features).view(), labels)?,
        None => params.input_gradient(features, labels)?,
    };
    if let Some((row, _)) = grad
        .axis_iter(Axis(0))
        .enumerate()
        .find(|(_, r)| r.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite {
            what: "input gradient",
            row,
        });
    }
    let mut adv = features.to_owned();
    Zip::from(&mut adv).and(&grad).for_each(|x, &g| *x += epsilon * sign(g));
    Ok(adv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::classifier::{evaluate_accuracy, sgd};
    use crate::lab::dataset::{make_dataset, DatasetSpec};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trained() -> (ClassifierParams, Array2<f64>, Vec<usize>) {
        let data = make_dataset(&DatasetSpec::blobs(1, 3, 2, 600)).unwrap();
        let (x, y) = data.subset(&data.train);
        let out = sgd(x.view(), &y, 3, 16, 0.1, 32, 10, 0).unwrap();
        let (xa, ya) = data.subset(&data.attack);
        (out.params, xa, ya)
    }

    #[test]
    fn zero_epsilon_is_identity() {
        let (params, x, y) = trained();
        let cfg = AttackConfig {
            epsilon: 0.0,
            defended_bit_depth: None,
        };
        let adv = fgm_attack(&params, x.view(), &y, &cfg).unwrap();
        assert_eq!(adv, x);
        assert_eq!(
            evaluate_accuracy(&params, adv.view(), &y).unwrap(),
            evaluate_accuracy(&params, x.view(), &y).unwrap()
        );
    }

    #[test]
    fn perturbation_has_magnitude_epsilon() {
        let (params, x, y) = trained();
        let adv = fgm_attack(&params, x.view(), &y, &AttackConfig::new(0.3).unwrap()).unwrap();
        let grad = params.input_gradient(x.view(), &y).unwrap();
        Zip::from(&adv).and(&x).and(&grad).for_each(|&a, &b, &g| {
            let d = (a - b).abs();
            if g == 0.0 {
                assert_eq!(d, 0.0);
            } else {
                assert!((d - 0.3).abs() < 1e-12);
            }
        });
    }

    #[test]
    fn zero_gradient_components_are_unchanged() {
        // The second input has no weight, so its gradient is exactly zero.
        let params = ClassifierParams {
            w1: array![[1.0], [0.0]],
            b1: array![0.0],
            w2: array![[-2.0, 2.0]],
            b2: array![0.0, 0.0],
        };
        let x = array![[0.5, 3.0], [-0.5, -1.0]];
        let adv = fgm_attack(&params, x.view(), &[1, 0], &AttackConfig::new(0.1).unwrap()).unwrap();
        assert_eq!(adv.column(1), x.column(1));
        assert!((adv[[0, 0]] - 0.4).abs() < 1e-12);
        assert!((adv[[1, 0]] + 0.4).abs() < 1e-12);
    }

    #[test]
    fn attack_config_rejects_nonpositive_epsilon() {
        assert!(AttackConfig::new(0.0).is_err());
        assert!(AttackConfig::new(-0.1).is_err());
        assert!(AttackConfig::new(f64::NAN).is_err());
        assert!(AttackConfig::new(0.1).unwrap().with_defence(7).is_err());
    }

    fn random_features(seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((200, 3), |_| rng.random_range(-3.0..3.0))
    }

    #[test]
    fn sixty_four_bits_is_lossless_at_double_precision() {
        let x = random_features(0);
        let s = squeeze_features(x.view(), 64).unwrap();
        Zip::from(&s).and(&x).for_each(|a, b| assert!((a - b).abs() < 1e-12));
    }

    #[test]
    fn eight_bits_leaves_at_most_256_values() {
        let x = random_features(1);
        let s = squeeze_features(x.view(), 8).unwrap();
        for col in s.axis_iter(Axis(1)) {
            let mut v: Vec<f64> = col.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            assert!(v.len() <= 256);
        }
        let s4 = squeeze_features(x.view(), 4).unwrap();
        for col in s4.axis_iter(Axis(1)) {
            let mut v: Vec<f64> = col.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            assert!(v.len() <= 16);
        }
    }

    #[test]
    fn squeezing_is_idempotent() {
        let x = random_features(2);
        for bits in [4, 8, 16] {
            let once = squeeze_features(x.view(), bits).unwrap();
            let twice = squeeze_features(once.view(), bits).unwrap();
            assert_eq!(once, twice, "bits {bits}");
        }
        for bits in [32, 64] {
            let once = squeeze_features(x.view(), bits).unwrap();
            let twice = squeeze_features(once.view(), bits).unwrap();
            Zip::from(&once).and(&twice).for_each(|a, b| assert!((a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn unsupported_bit_depth_is_rejected() {
        let x = random_features(3);
        assert!(squeeze_features(x.view(), 5).is_err());
        assert!(squeeze_features(x.view(), 0).is_err());
    }

    #[test]
    fn defended_attack_still_moves_by_epsilon() {
        let (params, x, y) = trained();
        let cfg = AttackConfig::new(0.5).unwrap().with_defence(4).unwrap();
        let adv = fgm_attack(&params, x.view(), &y, &cfg).unwrap();
        Zip::from(&adv).and(&x).for_each(|&a, &b| {
            let d = (a - b).abs();
            assert!(d == 0.0 || (d - 0.5).abs() < 1e-12);
        });
    }
}
