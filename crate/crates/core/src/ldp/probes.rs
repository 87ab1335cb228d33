use crate::brw::{advance, lattice_set, BranchingLaw, ParticleMeasure};
use crate::error::{Error, Result};
use crate::gaussian::{nu, nu_n_of_set};
use crate::interval::IntervalSet;
use crate::stats::{wilson_interval, Z95};

use super::Simulation;

/// Frequency of a deviation event over independent replicas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub events: u64,
    pub replicas: u64,
    pub frequency: f64,
    /// Deterministic centering of the event (`nu_n(A)` or `nu(A)`).
    pub reference: f64,
    /// Level the empirical fraction had to exceed.
    pub threshold: f64,
    pub ci: (f64, f64),
}

impl ProbeResult {
    fn new(events: u64, replicas: u64, reference: f64, threshold: f64) -> Self {
        ProbeResult {
            events,
            replicas,
            frequency: events as f64 / replicas as f64,
            reference,
            threshold,
            ci: wilson_interval(events, replicas, Z95),
        }
    }
}

fn check_replicas(replicas: u64) -> Result<()> {
    if replicas == 0 {
        Err(Error::invalid("need at least one replica"))
    } else {
        Ok(())
    }
}

/// Frequency of `Zbar_n^zeta(A) > nu_n(A) + delta` for `zeta = N delta_0`.
/// `A` is read in lattice units, without `sqrt n` scaling.
pub fn concentration_probe(
    roots: u64,
    a: &IntervalSet,
    delta: f64,
    n: u64,
    law: &BranchingLaw,
    replicas: u64,
    sim: &Simulation,
) -> Result<ProbeResult> {
    check_replicas(replicas)?;
    if roots == 0 {
        return Err(Error::invalid("need at least one root particle"));
    }
    let reference = nu_n_of_set(n, a);
    let threshold = reference + delta;
    let start = ParticleMeasure::delta(0, roots, 0)?;
    let domain = format!("concentration/N{roots}/n{n}/{a}/{delta}");
    let hits = sim.replicate(&domain, replicas, |rng| {
        let z = advance(&start, law, n, sim.mode, &sim.step, rng)?;
        Ok(z.fraction_exceeds(a, threshold, true))
    })?;
    Ok(ProbeResult::new(hits.iter().filter(|&&h| h).count() as u64, replicas, reference, threshold))
}

/// Frequency of `Zbar_n(sqrt n A) > nu(A) + t / sqrt n` from a single root.
pub fn typical_deviation_probe(
    a: &IntervalSet,
    t: f64,
    n: u64,
    law: &BranchingLaw,
    replicas: u64,
    sim: &Simulation,
) -> Result<ProbeResult> {
    check_replicas(replicas)?;
    if !(t >= 0.0) || n == 0 {
        return Err(Error::invalid("need t >= 0 and n >= 1"));
    }
    let reference = nu(a);
    let threshold = reference + t / (n as f64).sqrt();
    let set = lattice_set(a, n, 0);
    let domain = format!("typical/n{n}/{a}/{t}");
    let hits = sim.replicate(&domain, replicas, |rng| {
        let z = advance(&ParticleMeasure::root(), law, n, sim.mode, &sim.step, rng)?;
        Ok(z.fraction_exceeds(&set, threshold, true))
    })?;
    Ok(ProbeResult::new(hits.iter().filter(|&&h| h).count() as u64, replicas, reference, threshold))
}

/// Weighted least-squares slope of `log frequency` against `x`, with the
/// delta-method variance `(1 - f) / events` per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub stderr: f64,
}

impl SlopeEstimate {
    /// Upper end of the one-sided confidence bound at normal quantile `z`.
    pub fn upper(&self, z: f64) -> f64 {
        self.slope + z * self.stderr
    }
}

pub fn log_frequency_slope(points: &[(f64, ProbeResult)]) -> Result<SlopeEstimate> {
    if points.len() < 2 {
        return Err(Error::invalid("slope needs at least two probes"));
    }
    if points.iter().any(|(_, r)| r.events == 0) {
        return Err(Error::invalid("log-frequency slope undefined with zero events"));
    }
    let w: Vec<f64> = points.iter().map(|(_, r)| r.events as f64 / (1.0 - r.frequency).max(1e-12)).collect();
    let x: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    let y: Vec<f64> = points.iter().map(|(_, r)| r.frequency.ln()).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("degenerate abscissae"));
    }
    let sxy: f64 = (0..x.len()).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    Ok(SlopeEstimate { slope: sxy / sxx, stderr: sxx.recip().sqrt() })
}
