use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::classifier::Work;
use crate::Result;

/// Cost model for [`Clock::Simulated`]: a fixed overhead per batched call plus
/// a throughput term, scaled by seeded log-normal measurement jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedClock {
    pub seconds_per_flop: f64,
    pub seconds_per_call: f64,
    pub jitter: f64,
}

impl Default for SimulatedClock {
    fn default() -> Self {
        Self {
            seconds_per_flop: 1e-9,
            seconds_per_call: 2e-5,
            jitter: 0.05,
        }
    }
}

/// Source of the durations recorded in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clock {
    /// Monotonic wall clock.
    Monotonic,
    /// Deterministic durations derived from the work a phase reports.
    Simulated(SimulatedClock),
    /// Every measured phase lasts exactly `seconds`.
    Fixed { seconds: f64 },
}

impl Default for Clock {
    fn default() -> Self {
        Clock::Monotonic
    }
}

impl Clock {
    /// Run `phase` and return its output with the seconds it took under this
    /// clock. `key` seeds the simulated jitter and is ignored otherwise.
    pub fn measure<T>(&self, key: u64, phase: impl FnOnce() -> Result<(T, Work)>) -> Result<(T, f64)> {
        match self {
            Clock::Monotonic => {
                let start = Instant::now();
                let (out, _) = phase()?;
                Ok((out, start.elapsed().as_secs_f64()))
            }
            Clock::Simulated(sim) => {
                let (out, work) = phase()?;
                let base = work.flops * sim.seconds_per_flop + work.calls as f64 * sim.seconds_per_call;
                let z: f64 = StandardNormal.sample(&mut ChaCha8Rng::seed_from_u64(key));
                Ok((out, base * (sim.jitter * z).exp()))
            }
            Clock::Fixed { seconds } => Ok((phase()?.0, *seconds)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn work() -> Result<((), Work)> {
        Ok((
            (),
            Work {
                flops: 1e6,
                calls: 10,
            },
        ))
    }

    #[test]
    fn fixed_clock_reports_its_step() {
        let (_, t) = Clock::Fixed { seconds: 0.25 }.measure(0, work).unwrap();
        assert_eq!(t, 0.25);
    }

    #[test]
    fn simulated_clock_is_deterministic_per_key() {
        let clock = Clock::Simulated(SimulatedClock::default());
        let a = clock.measure(5, work).unwrap().1;
        let b = clock.measure(5, work).unwrap().1;
        let c = clock.measure(6, work).unwrap().1;
        assert_eq!(a, b);
        assert_ne!(a, c);
        // 1e6 flops at 1 GFLOP/s + 10 calls at 20 us = 1.2 ms before jitter
        assert!((a / 1.2e-3).ln().abs() < 0.3);
    }

    #[test]
    fn simulated_clock_without_jitter_is_the_cost_model() {
        let clock = Clock::Simulated(SimulatedClock {
            jitter: 0.0,
            ..Default::default()
        });
        let t = clock.measure(1, work).unwrap().1;
        assert!((t - 1.2e-3).abs() < 1e-15);
    }

    #[test]
    fn monotonic_clock_is_nonnegative() {
        let (_, t) = Clock::Monotonic.measure(0, work).unwrap();
        assert!(t >= 0.0);
    }
}
