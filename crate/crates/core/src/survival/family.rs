//! Standardized error distributions of the log-linear AFT model
//! `ln T = eta + sigma * W`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `W` follows the minimum extreme value (Gumbel) law.
    Weibull,
    /// `W` is standard logistic.
    LogLogistic,
    /// `W` is standard normal.
    LogNormal,
}

/// A function value with its first two derivatives in `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taylor2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

impl Family {
    pub const ALL: [Family; 3] = [Family::Weibull, Family::LogLogistic, Family::LogNormal];

    /// Name used in reports, e.g. `Log Logistic`.
    pub fn display_name(self) -> &'static str {
        match self {
            Family::Weibull => "Weibull",
            Family::LogLogistic => "Log Logistic",
            Family::LogNormal => "Log Normal",
        }
    }

    /// `ln f_W(z)` and derivatives.
    pub fn log_density(self, z: f64) -> Taylor2 {
        match self {
            Family::Weibull => {
                let e = z.exp();
                Taylor2 {
                    value: z - e,
                    d1: 1.0 - e,
                    d2: -e,
                }
            }
            Family::LogLogistic => {
                let p = logistic(z);
                Taylor2 {
                    value: z - 2.0 * softplus(z),
                    d1: 1.0 - 2.0 * p,
                    d2: -2.0 * p * (1.0 - p),
                }
            }
            Family::LogNormal => Taylor2 {
                value: -0.5 * z * z - LN_SQRT_2PI,
                d1: -z,
                d2: -1.0,
            },
        }
    }

    /// `ln S_W(z)` and derivatives.
    pub fn log_survival(self, z: f64) -> Taylor2 {
        match self {
            Family::Weibull => {
                let e = z.exp();
                Taylor2 {
                    value: -e,
                    d1: -e,
                    d2: -e,
                }
            }
            Family::LogLogistic => {
                let p = logistic(z);
                Taylor2 {
                    value: -softplus(z),
                    d1: -p,
                    d2: -p * (1.0 - p),
                }
            }
            Family::LogNormal => {
                let lambda = mills_inverse(z);
                Taylor2 {
                    value: log_upper_normal(z),
                    d1: -lambda,
                    d2: -lambda * (lambda - z),
                }
            }
        }
    }

    /// `S_W(z)`.
    pub fn survival(self, z: f64) -> f64 {
        if z == f64::NEG_INFINITY {
            return 1.0;
        }
        match self {
            Family::Weibull => (-z.exp()).exp(),
            Family::LogLogistic => logistic(-z),
            Family::LogNormal => 0.5 * libm::erfc(z / SQRT_2),
        }
    }

    /// Draw one standardized error.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Family::LogNormal => rng.sample(rand_distr::StandardNormal),
            _ => {
                // inverse CDF on the open interval (0, 1)
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                match self {
                    Family::Weibull => (-(-u).ln_1p()).ln(),
                    _ => (u / (1.0 - u)).ln(),
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Weibull => "weibull",
            Family::LogLogistic => "log_logistic",
            Family::LogNormal => "log_normal",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "weibull" => Ok(Family::Weibull),
            "log_logistic" | "loglogistic" => Ok(Family::LogLogistic),
            "log_normal" | "lognormal" => Ok(Family::LogNormal),
            _ => Err(Error::InvalidArgument(format!(
                "unknown family {s:?}; expected weibull, log_logistic or log_normal"
            ))),
        }
    }
}

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)`.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `ln Q(z)` with `Q = 1 - Phi`.
fn log_upper_normal(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * libm::erfc(z / SQRT_2)).ln()
    } else {
        -0.5 * z * z - LN_SQRT_2PI + mills_ratio_cf(z).ln()
    }
}

/// Inverse Mills ratio `phi(z) / Q(z)`.
fn mills_inverse(z: f64) -> f64 {
    if z < 30.0 {
        let phi = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        phi / (0.5 * libm::erfc(z / SQRT_2))
    } else {
        1.0 / mills_ratio_cf(z)
    }
}

/// `Q(z) / phi(z)` by its continued fraction, accurate for large `z`.
fn mills_ratio_cf(z: f64) -> f64 {
    let mut t = z;
    for k in (1..=40).rev() {
        t = z + k as f64 / t;
    }
    1.0 / t
}
