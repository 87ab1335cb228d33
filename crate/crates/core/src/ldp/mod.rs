//! Lower-bound estimates of `P(Zbar_n(sqrt n A) >= p)` built from forced
//! prefixes and simulated conditional success, plus the concentration and typical-deviation probes.

pub mod estimate;
pub mod probes;
pub mod strategy;

use rayon::prelude::*;

use crate::brw::{Mode, StepConfig};
use crate::error::Result;
use crate::rng::{stream, StreamRng};

pub use estimate::{conditional_success_estimate, ldp_lower_bound, rate_fit, LdpEstimate, SuccessEstimate};
pub use probes::{concentration_probe, log_frequency_slope, typical_deviation_probe, ProbeResult};
pub use strategy::{
    enumerated_forced_probability, enumerated_target_probability, forced_step, ln_rational, strategy_prefix_logprob,
    StrategyKind, StrategySpec,
};

/// Simulation fidelity and seeding shared by the Monte Carlo routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Simulation {
    pub mode: Mode,
    pub step: StepConfig,
    pub seed: u64,
}

impl Simulation {
    pub fn new(mode: Mode, seed: u64) -> Self {
        Simulation { mode, step: StepConfig::default(), seed }
    }

    /// Runs `replicas` independent trials in parallel; replica `i` always sees
    /// stream `i` of `domain`, so the outcome vector is independent of scheduling.
    pub fn replicate<T, F>(&self, domain: &str, replicas: u64, trial: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut StreamRng) -> Result<T> + Sync,
    {
        (0..replicas).into_par_iter().map(|i| trial(&mut stream(self.seed, domain, i))).collect()
    }
}

impl Default for Simulation {
    fn default() -> Self {
        Simulation::new(Mode::Hybrid { cap: 10_000 }, 0)
    }
}
