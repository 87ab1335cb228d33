//! Branching random walk with `±1` steps.

pub mod enumerate;
pub mod law;
pub mod measure;
pub mod step;

pub use enumerate::{enumerate_exact, genealogy_event_probability, measure_distribution};
pub use law::BranchingLaw;
pub use measure::{empirical_fraction, lattice_set, ParticleMeasure};
pub use step::{advance, evolve, step, step_aggregated, step_exact, Mode, PopulationStats, StepConfig, Trajectory};
