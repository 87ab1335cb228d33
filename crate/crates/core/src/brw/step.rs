use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution, StandardNormal};

use super::law::BranchingLaw;
use super::measure::ParticleMeasure;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

/// Thresholds separating exact sampling from normal approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepConfig {
    /// Offspring sums of at most this many particles are sampled exactly.
    pub offspring_exact_max: u64,
    /// Left/right splits of at most this many children are sampled exactly.
    pub split_exact_max: u64,
    /// Largest population [`step_exact`] accepts.
    pub particle_cap: u64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { offspring_exact_max: 64, split_exact_max: 1_000_000, particle_cap: 10_000_000 }
    }
}

impl StepConfig {
    /// Aggregated stepping that never approximates while counts fit in 64 bits.
    pub fn exact_in_law() -> Self {
        StepConfig { offspring_exact_max: u64::MAX, split_exact_max: u64::MAX, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Particle by particle.
    Exact,
    /// Position by position with large counts approximated.
    Aggregated,
    /// Particle by particle until the population exceeds `cap`.
    Hybrid { cap: u64 },
}

impl std::str::FromStr for Mode {
    type Err = Error;

    /// `exact`, `aggregated`, `hybrid` or `hybrid:<cap>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Mode::Exact),
            "aggregated" => Ok(Mode::Aggregated),
            "hybrid" => Ok(Mode::Hybrid { cap: StepConfig::default().particle_cap }),
            t => t
                .strip_prefix("hybrid:")
                .and_then(|c| c.parse().ok())
                .map(|cap| Mode::Hybrid { cap })
                .ok_or_else(|| Error::Parse { pos: 0, msg: format!("unknown mode '{t}'") }),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Aggregated => f.write_str("aggregated"),
            Mode::Hybrid { cap } => write!(f, "hybrid:{cap}"),
        }
    }
}

fn children_split<R: RngCore + ?Sized>(k: u64, rng: &mut R) -> u64 {
    let mut right = 0u64;
    let mut rest = k;
    while rest >= 64 {
        right += rng.next_u64().count_ones() as u64;
        rest -= 64;
    }
    if rest > 0 {
        right += (rng.next_u64() & ((1u64 << rest) - 1)).count_ones() as u64;
    }
    right
}

/// One generation, every particle reproducing and every child stepping on its own.
pub fn step_exact<R: RngCore + ?Sized>(
    zeta: &ParticleMeasure,
    law: &BranchingLaw,
    cfg: &StepConfig,
    rng: &mut R,
) -> Result<ParticleMeasure> {
    let total = zeta
        .total_u64()
        .filter(|&t| t <= cfg.particle_cap)
        .ok_or_else(|| Error::CapExceeded { total: zeta.total_u64().unwrap_or(u64::MAX), cap: cfg.particle_cap })?;
    debug_assert!(total > 0);
    let (offset, counts) = zeta.dense();
    let mut next = vec![0u64; counts.len() + 2];
    for (i, c) in counts.iter().enumerate() {
        for _ in 0..c.to_u64().expect("bounded by cap") {
            let k = law.sample(rng);
            let right = children_split(k, rng);
            next[i] += k - right;
            next[i + 2] += right;
        }
    }
    Ok(ParticleMeasure::from_dense(offset - 1, next.into_iter().map(BigUint::from).collect(), zeta.generation() + 1))
}

/// Leading bits `m` of `c` and an even `shift` with `c ≈ m * 2^shift`, `m < 2^53`.
fn split_leading(c: &BigUint) -> (f64, u64) {
    let mut shift = c.bits().saturating_sub(53);
    shift += shift & 1;
    (leading_bits(c, shift) as f64, shift)
}

/// `round(m * mean + sqrt(m * var) * 2^(-shift/2) * N(0,1))`, the normal
/// approximation of a sum over `m * 2^shift` variables in units of `2^shift`.
fn normal_units<R: Rng + ?Sized>(m: f64, shift: u64, mean: f64, var: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (m * mean + (m * var).sqrt() * z * libm::ldexp(1.0, -(shift as i32) / 2)).round()
}

/// Normal approximation of `c` Bernoulli(1/2) successes, never exceeding `c`.
fn normal_half<R: Rng + ?Sized>(c: &BigUint, rng: &mut R) -> BigUint {
    let (m, shift) = split_leading(c);
    let v = normal_units(m, shift, 0.5, 0.25, rng).clamp(0.0, m);
    big_from_f64(v) << shift
}

/// `c >> shift` for results below `2^64`, without allocating.
fn leading_bits(c: &BigUint, shift: u64) -> u64 {
    let (word, bit) = ((shift / 64) as usize, shift % 64);
    let mut digits = c.iter_u64_digits().skip(word);
    let lo = digits.next().unwrap_or(0) >> bit;
    let hi = match (bit, digits.next()) {
        (0, _) | (_, None) => 0,
        (b, Some(d)) => d << (64 - b),
    };
    lo | hi
}

fn big_from_f64(v: f64) -> BigUint {
    if v < 1.0 {
        return BigUint::zero();
    }
    let (mant, exp, _) = num_traits::Float::integer_decode(v);
    if exp >= 0 {
        BigUint::from(mant) << exp as u32
    } else {
        BigUint::from(mant >> (-exp) as u32)
    }
}

/// Children of `c` particles.
fn offspring_total<R: Rng + ?Sized>(c: &BigUint, law: &BranchingLaw, cfg: &StepConfig, rng: &mut R) -> BigUint {
    if law.is_deterministic() {
        return c * law.b();
    }
    if let Some(small) = c.to_u64().filter(|&s| s <= cfg.offspring_exact_max) {
        return BigUint::from(law.sample_sum(small, rng));
    }
    // clamped to [b c, K c]; the lower clamp needs exact arithmetic only when
    // the draw lands within one unit of it
    let (m, shift) = split_leading(c);
    let (b, k) = (law.b() as f64, law.max_offspring() as f64);
    let v = normal_units(m, shift, law.beta(), law.variance(), rng).min(m * k);
    if v >= (m + 1.0) * b {
        big_from_f64(v) << shift
    } else {
        (big_from_f64(v.max(0.0)) << shift).max(c * law.b())
    }
}

/// Children among `t` stepping right.
fn right_movers<R: Rng + ?Sized>(t: &BigUint, cfg: &StepConfig, rng: &mut R) -> BigUint {
    if let Some(small) = t.to_u64().filter(|&s| s <= cfg.split_exact_max) {
        return BigUint::from(Binomial::new(small, 0.5).expect("valid").sample(rng));
    }
    normal_half(t, rng)
}

/// One generation position by position: offspring totals are drawn per site
/// (exactly for small counts, by a rounded normal otherwise) and then split
/// left and right, conserving the number of children exactly.
pub fn step_aggregated<R: Rng + ?Sized>(
    zeta: &ParticleMeasure,
    law: &BranchingLaw,
    cfg: &StepConfig,
    rng: &mut R,
) -> ParticleMeasure {
    let (offset, counts) = zeta.dense();
    let mut next = vec![BigUint::zero(); counts.len() + 2];
    for (i, c) in counts.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let t = offspring_total(c, law, cfg, rng);
        let right = right_movers(&t, cfg, rng);
        next[i] += &t;
        next[i] -= &right;
        next[i + 2] += right;
    }
    ParticleMeasure::from_dense(offset - 1, next, zeta.generation() + 1)
}

pub fn step<R: Rng + ?Sized>(
    zeta: &ParticleMeasure,
    law: &BranchingLaw,
    mode: Mode,
    cfg: &StepConfig,
    rng: &mut R,
) -> Result<ParticleMeasure> {
    match mode {
        Mode::Exact => step_exact(zeta, law, cfg, rng),
        Mode::Aggregated => Ok(step_aggregated(zeta, law, cfg, rng)),
        Mode::Hybrid { cap } => match zeta.total_u64() {
            Some(t) if t <= cap => {
                let cfg = StepConfig { particle_cap: cap, ..*cfg };
                step_exact(zeta, law, &cfg, rng)
            }
            _ => Ok(step_aggregated(zeta, law, cfg, rng)),
        },
    }
}

/// Population summary after one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationStats {
    pub generation: u64,
    /// `log |Z_n|`.
    pub total_log: f64,
    /// `log |Zhat_n| = log |Z_n| - n log beta`.
    pub normalized_total_log: f64,
    /// `|Zhat_n|`, the martingale.
    pub normalized_total: f64,
    pub mean_position: f64,
    /// `Z_n(sqrt n A)/|Z_n|` for the tracked set, if any.
    pub fraction: Option<f64>,
}

impl PopulationStats {
    pub fn of(zeta: &ParticleMeasure, law: &BranchingLaw, tracked: Option<&IntervalSet>) -> Result<Self> {
        let total_log = zeta.ln_total();
        let normalized_total_log = total_log - zeta.generation() as f64 * law.beta().ln();
        let normalized_total = normalized_total_log.exp();
        if !normalized_total_log.is_finite() || !normalized_total.is_finite() {
            return Err(Error::numeric(format!("normalized total out of range at generation {}", zeta.generation())));
        }
        Ok(PopulationStats {
            generation: zeta.generation(),
            total_log,
            normalized_total_log,
            normalized_total,
            mean_position: zeta.mean_position(),
            fraction: tracked.map(|a| super::measure::empirical_fraction(zeta, zeta.generation(), a)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// One entry per generation, starting with the initial measure.
    pub stats: Vec<PopulationStats>,
    pub last: ParticleMeasure,
}

/// Runs `n` generations, recording statistics (and the fraction in `sqrt(g) A`
/// for `tracked`) after each.
pub fn evolve<R: Rng + ?Sized>(
    zeta0: &ParticleMeasure,
    law: &BranchingLaw,
    n: u64,
    mode: Mode,
    cfg: &StepConfig,
    tracked: Option<&IntervalSet>,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut stats = vec![PopulationStats::of(zeta0, law, tracked)?];
    let mut z = zeta0.clone();
    for _ in 0..n {
        z = step(&z, law, mode, cfg, rng)?;
        stats.push(PopulationStats::of(&z, law, tracked)?);
    }
    Ok(Trajectory { stats, last: z })
}

/// [`evolve`] without bookkeeping.
pub fn advance<R: Rng + ?Sized>(
    zeta0: &ParticleMeasure,
    law: &BranchingLaw,
    n: u64,
    mode: Mode,
    cfg: &StepConfig,
    rng: &mut R,
) -> Result<ParticleMeasure> {
    let mut z = zeta0.clone();
    for _ in 0..n {
        z = step(&z, law, mode, cfg, rng)?;
    }
    Ok(z)
}
