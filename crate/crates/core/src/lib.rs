//! Large-deviation laboratory for the empirical distribution of a branching
//! random walk with `±1` steps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brw;
pub mod cli;
pub mod error;
pub mod ext;
pub mod gaussian;
pub mod interval;
pub mod ldp;
pub mod rate;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
