use crate::brw::{advance, lattice_set, BranchingLaw, ParticleMeasure};
use crate::error::{Error, Result};
use crate::ext::ExtFloat;
use crate::gaussian::varphi;
use crate::interval::IntervalSet;
use crate::rate::{classify, Scale};
use crate::stats::{linear_fit, wilson_interval, LinearFit, Z95};

use super::strategy::{strategy_prefix_logprob, StrategySpec};
use super::Simulation;

/// Tolerance of the `varphi(A, r, x) >= p` feasibility check.
pub const FEASIBILITY_TOL: f64 = 1e-8;

pub const MIN_REPLICAS: u64 = 100;

/// Estimated probability that one particle at `w` makes the event happen on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub successes: u64,
    pub replicas: u64,
    pub q_hat: f64,
    /// Wilson 95% interval.
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl SuccessEstimate {
    fn from_counts(successes: u64, replicas: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(successes, replicas, Z95);
        SuccessEstimate { successes, replicas, q_hat: successes as f64 / replicas as f64, ci_lo, ci_hi }
    }

    /// `q_hat`, or `1/(2 N)` when no replica succeeded (the Wilson lower bound is 0 there).
    pub fn effective(&self) -> f64 {
        if self.successes == 0 {
            0.5 / self.replicas as f64
        } else {
            self.q_hat
        }
    }
}

/// Estimates `P(Zbar_m(sqrt n A - w) >= p)` for the descendants of a single
/// particle, by simulating `m` generations from the origin in the frame of `w`.
pub fn conditional_success_estimate(
    spec: &StrategySpec,
    a: &IntervalSet,
    p: f64,
    law: &BranchingLaw,
    replicas: u64,
    sim: &Simulation,
) -> Result<SuccessEstimate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("level p must lie in [0,1], got {p}")));
    }
    if replicas < MIN_REPLICAS {
        return Err(Error::invalid(format!("need at least {MIN_REPLICAS} replicas, got {replicas}")));
    }
    if a.is_real_line() {
        return Ok(SuccessEstimate::from_counts(replicas, replicas));
    }
    let set = lattice_set(a, spec.n, spec.w);
    let domain = format!("conditional/{}/n{}/w{}/q{}/{a}/{p}", spec.kind, spec.n, spec.w, spec.q);
    let root = ParticleMeasure::root();
    let hits = sim.replicate(&domain, replicas, |rng| {
        let z = advance(&root, law, spec.m, sim.mode, &sim.step, rng)?;
        Ok(z.fraction_exceeds(&set, p, false))
    })?;
    Ok(SuccessEstimate::from_counts(hits.iter().filter(|&&h| h).count() as u64, replicas))
}

/// Composed lower-bound estimate of `P(Zbar_n(sqrt n A) >= p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdpEstimate {
    pub spec: StrategySpec,
    pub log_prefix: ExtFloat,
    pub success: SuccessEstimate,
    /// No replica succeeded; `q` was replaced by [`SuccessEstimate::effective`].
    pub zero_success: bool,
    /// `-log P_hat = -log_prefix + b^s (-log q)`.
    pub neg_log_p: ExtFloat,
    pub log_neg_log: f64,
    /// `log_neg_log` recomputed at the ends of the success interval.
    pub log_neg_log_band: (f64, f64),
    pub theory_rate: f64,
    pub scale: Scale,
    /// `|log_neg_log / (theory_rate scale(n)) - 1|`.
    pub relative_gap: f64,
}

fn compose(log_prefix: ExtFloat, b: u64, s: u64, q: f64) -> ExtFloat {
    let per_root = ExtFloat::from_f64(-q.ln());
    -log_prefix + ExtFloat::powi(b, s) * per_root
}

/// Lower bound `P >= P(Z_s = b^s delta_w) q^(b^s)` with `q` estimated by simulation.
pub fn ldp_lower_bound(
    spec: &StrategySpec,
    a: &IntervalSet,
    p: f64,
    law: &BranchingLaw,
    replicas: u64,
    sim: &Simulation,
) -> Result<LdpEstimate> {
    let theory = classify(a, p, law.b() as u32)?;
    let reach = varphi(a, spec.r, spec.x)?;
    if reach < p - FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "varphi(A, r = {}, x = {}) = {reach:.9} falls short of p = {p} by {:.3e}",
            spec.r,
            spec.x,
            p - reach
        )));
    }
    let log_prefix = strategy_prefix_logprob(spec, law);
    let success = conditional_success_estimate(spec, a, p, law, replicas, sim)?;
    let b = law.b();
    let neg_log_p = compose(log_prefix, b, spec.s, success.effective());
    let log_neg_log = neg_log_p.ln_abs();
    let band_hi =
        if success.ci_lo > 0.0 { compose(log_prefix, b, spec.s, success.ci_lo).ln_abs() } else { f64::INFINITY };
    let band_lo = compose(log_prefix, b, spec.s, success.ci_hi).ln_abs();
    let theory_rate = theory.rate();
    let scale = theory.scale;
    let relative_gap =
        if theory_rate > 0.0 { (log_neg_log / (theory_rate * scale.at(spec.n as f64)) - 1.0).abs() } else { f64::NAN };
    Ok(LdpEstimate {
        spec: *spec,
        log_prefix,
        success,
        zero_success: success.successes == 0,
        neg_log_p,
        log_neg_log,
        log_neg_log_band: (band_lo, band_hi),
        theory_rate,
        scale,
        relative_gap,
    })
}

/// Least-squares fit of `log(-log P)` against `sqrt n` or `n`.
pub fn rate_fit(points: &[(u64, f64)], scale: Scale) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::invalid("rate fit needs at least three grid points"));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| scale.at(n as f64)).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    linear_fit(&xs, &ys)
}
