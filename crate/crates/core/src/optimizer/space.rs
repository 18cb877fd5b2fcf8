use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::types::{HyperParams, BATCH_SIZE_BOUNDS, BIT_DEPTHS, EPOCH_BOUNDS, LEARNING_RATE_BOUNDS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Continuous { low: f64, high: f64, log: bool },
    Integer { low: i64, high: i64, log: bool },
    Categorical { choices: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub domain: Domain,
}

impl ParamSpec {
    pub fn continuous(name: &str, low: f64, high: f64, log: bool) -> Self {
        Self {
            name: name.into(),
            domain: Domain::Continuous { low, high, log },
        }
    }

    pub fn integer(name: &str, low: i64, high: i64, log: bool) -> Self {
        Self {
            name: name.into(),
            domain: Domain::Integer { low, high, log },
        }
    }

    pub fn categorical(name: &str, choices: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            domain: Domain::Categorical { choices },
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("parameter {}: {msg}", self.name)));
        match &self.domain {
            Domain::Continuous { low, high, log } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return bad(format!("bounds [{low}, {high}] are not an interval"));
                }
                if *log && *low <= 0.0 {
                    return bad("log scale needs a positive lower bound".into());
                }
            }
            Domain::Integer { low, high, log } => {
                if low > high {
                    return bad(format!("bounds [{low}, {high}] are not an interval"));
                }
                if *log && *low <= 0 {
                    return bad("log scale needs a positive lower bound".into());
                }
            }
            Domain::Categorical { choices } => {
                if choices.is_empty() || choices.iter().any(|c| !c.is_finite()) {
                    return bad("needs at least one finite choice".into());
                }
            }
        }
        Ok(())
    }

    /// Bounds in the internal (log where requested) coordinate.
    pub(crate) fn internal_bounds(&self) -> Option<(f64, f64)> {
        match &self.domain {
            Domain::Continuous { low, high, log } => Some(if *log { (low.ln(), high.ln()) } else { (*low, *high) }),
            Domain::Integer { low, high, log } => {
                let (lo, hi) = (*low as f64, *high as f64);
                // widen by half a step so every integer owns an equal share
                Some(if *log {
                    ((lo - 0.5).max(lo * 0.5).ln(), (hi + 0.5).ln())
                } else {
                    (lo - 0.5, hi + 0.5)
                })
            }
            Domain::Categorical { .. } => None,
        }
    }

    pub(crate) fn to_internal(&self, value: f64) -> f64 {
        match &self.domain {
            Domain::Continuous { log: true, .. } | Domain::Integer { log: true, .. } => value.ln(),
            _ => value,
        }
    }

    /// Map an internal coordinate back to a value inside the domain.
    pub(crate) fn from_internal(&self, u: f64) -> f64 {
        match &self.domain {
            Domain::Continuous { low, high, log } => {
                let v = if *log { u.exp() } else { u };
                v.clamp(*low, *high)
            }
            Domain::Integer { low, high, log } => {
                let v = if *log { u.exp() } else { u };
                (v.round() as i64).clamp(*low, *high) as f64
            }
            Domain::Categorical { choices } => choices[(u as usize).min(choices.len() - 1)],
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        match &self.domain {
            Domain::Continuous { low, high, .. } => (*low..=*high).contains(&value),
            Domain::Integer { low, high, .. } => {
                value.fract() == 0.0 && (*low as f64..=*high as f64).contains(&value)
            }
            Domain::Categorical { choices } => choices.contains(&value),
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.domain {
            Domain::Categorical { choices } => choices[rng.random_range(0..choices.len())],
            Domain::Integer { low, high, log: false } => rng.random_range(*low..=*high) as f64,
            _ => {
                let (lo, hi) = self.internal_bounds().expect("numeric domain");
                self.from_internal(rng.random_range(lo..=hi))
            }
        }
    }
}

/// Ordered parameters; points are `Vec<f64>` in the same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self> {
        for p in &params {
            p.validate()?;
        }
        Ok(Self { params })
    }

    /// Learning rate (log), batch size (log integer), epochs (integer) and
    /// optionally the squeezing bit depth.
    pub fn hyperparams(with_bit_depth: bool) -> Self {
        let (lr_lo, lr_hi) = LEARNING_RATE_BOUNDS;
        let (b_lo, b_hi) = BATCH_SIZE_BOUNDS;
        let (e_lo, e_hi) = EPOCH_BOUNDS;
        let mut params = vec![
            ParamSpec::continuous("learning_rate", lr_lo, lr_hi, true),
            ParamSpec::integer("batch_size", b_lo as i64, b_hi as i64, true),
            ParamSpec::integer("epochs", e_lo as i64, e_hi as i64, false),
        ];
        if with_bit_depth {
            params.push(ParamSpec::categorical(
                "bit_depth",
                BIT_DEPTHS.iter().map(|&b| f64::from(b)).collect(),
            ));
        }
        Self { params }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.params.len() && self.params.iter().zip(point).all(|(p, v)| p.contains(*v))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.params.iter().map(|p| p.sample_uniform(rng)).collect()
    }

    /// Interpret a point of [`SearchSpace::hyperparams`].
    pub fn to_hyperparams(&self, point: &[f64]) -> Result<HyperParams> {
        let get = |name: &str| {
            self.params
                .iter()
                .position(|p| p.name == name)
                .map(|i| point[i])
        };
        let missing = |name: &str| Error::InvalidArgument(format!("search space has no {name} parameter"));
        Ok(HyperParams {
            learning_rate: get("learning_rate").ok_or_else(|| missing("learning_rate"))?,
            batch_size: get("batch_size").ok_or_else(|| missing("batch_size"))? as u64,
            epochs: get("epochs").ok_or_else(|| missing("epochs"))? as u64,
            bit_depth: get("bit_depth").map(|b| b as u32),
        })
    }

    pub fn from_hyperparams(&self, hp: &HyperParams) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| match p.name.as_str() {
                "learning_rate" => hp.learning_rate,
                "batch_size" => hp.batch_size as f64,
                "epochs" => hp.epochs as f64,
                "bit_depth" => hp.bit_depth.map_or(f64::NAN, f64::from),
                _ => f64::NAN,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_samples_respect_bounds_and_types() {
        let space = SearchSpace::hyperparams(true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..2000 {
            let x = space.sample_uniform(&mut rng);
            assert!(space.contains(&x), "{x:?}");
            let hp = space.to_hyperparams(&x).unwrap();
            assert!(hp.violations().is_empty());
        }
    }

    #[test]
    fn log_scale_covers_decades_evenly() {
        let space = SearchSpace::hyperparams(false);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 6000;
        let small = (0..n)
            .filter(|_| space.sample_uniform(&mut rng)[0] < 1e-3)
            .count() as f64
            / n as f64;
        assert!((small - 0.5).abs() < 0.03, "{small}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(SearchSpace::new(vec![ParamSpec::continuous("a", 1.0, 0.0, false)]).is_err());
        assert!(SearchSpace::new(vec![ParamSpec::continuous("a", 0.0, 1.0, true)]).is_err());
        assert!(SearchSpace::new(vec![ParamSpec::categorical("c", vec![])]).is_err());
    }

    #[test]
    fn hyperparams_round_trip() {
        let space = SearchSpace::hyperparams(true);
        let hp = HyperParams {
            learning_rate: 0.01,
            batch_size: 64,
            epochs: 7,
            bit_depth: Some(8),
        };
        assert_eq!(space.to_hyperparams(&space.from_hyperparams(&hp)).unwrap(), hp);
    }
}
