use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::brw::enumerate::{genealogy_event_probability, measure_distribution};
use crate::brw::{BranchingLaw, ParticleMeasure};
use crate::error::{Error, Result};
use crate::ext::ExtFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Minimal branching with every child stepping towards `x` for `|w|` generations.
    Shift,
    /// As `Shift`, preceded by `q` generations of minimal branching with alternating steps.
    Dilation,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Shift => "shift",
            StrategyKind::Dilation => "dilation",
        })
    }
}

/// A forced prefix of `s` generations ending in `b^s` particles at `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub x: f64,
    pub r: f64,
    pub n: u64,
    /// `floor(|x| sqrt n) sgn(x)`, with `sgn(0) = +1`.
    pub w: i64,
    /// `2 floor(r n / 2)`.
    pub q: u64,
    pub s: u64,
    /// Generations left after the prefix.
    pub m: u64,
}

impl StrategySpec {
    pub fn shift(x: f64, n: u64) -> Result<Self> {
        StrategySpec::build(StrategyKind::Shift, x, 0.0, n)
    }

    pub fn dilation(x: f64, r: f64, n: u64) -> Result<Self> {
        StrategySpec::build(StrategyKind::Dilation, x, r, n)
    }

    fn build(kind: StrategyKind, x: f64, r: f64, n: u64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("shift x must be finite, got {x}")));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(Error::invalid(format!("time fraction r must lie in [0,1), got {r}")));
        }
        if n == 0 {
            return Err(Error::invalid("horizon n must be positive"));
        }
        let sign = if x < 0.0 { -1 } else { 1 };
        let w = (x.abs() * (n as f64).sqrt()).floor() as i64 * sign;
        let q = 2 * ((r * n as f64) / 2.0).floor() as u64;
        let s = q + w.unsigned_abs();
        if s >= n {
            return Err(Error::Infeasible(format!("strategy needs s = {s} forced generations but n = {n}")));
        }
        Ok(StrategySpec { kind, x, r, n, w, q, s, m: n - s })
    }

    /// `b^s` particles at `w`, generation `s`.
    pub fn target(&self, b: u64) -> ParticleMeasure {
        let count = num_traits::pow(BigUint::from(b), self.s as usize);
        ParticleMeasure::delta(self.w, count, self.s).expect("positive count")
    }
}

/// `log P(forced prefix) = log(p_b 2^-b) (b^s - 1)/(b - 1)`: every particle of
/// generations `0..s` has exactly `b` children and all of them take the prescribed step.
pub fn strategy_prefix_logprob(spec: &StrategySpec, law: &BranchingLaw) -> ExtFloat {
    let b = law.b();
    let nodes = (num_traits::pow(BigUint::from(b), spec.s as usize) - 1u32) / (b - 1);
    if nodes.is_zero() {
        return ExtFloat::ZERO;
    }
    let per_node = law.p_b().ln() - b as f64 * std::f64::consts::LN_2;
    ExtFloat::from_biguint(&nodes) * ExtFloat::from_f64(per_node)
}

/// Step every child of generation `g < s` takes under the strategy: `sgn(w)`
/// for `|w|` generations, then `+1, -1, +1, ...` for `q` generations.
pub fn forced_step(spec: &StrategySpec, g: u64) -> i64 {
    let shift = spec.w.unsigned_abs();
    if g < shift {
        spec.w.signum()
    } else if (g - shift).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Probability of the forced prefix, by enumerating every genealogy of `s`
/// generations and keeping those where each particle has `b` children all
/// taking [`forced_step`].
pub fn enumerated_forced_probability(spec: &StrategySpec, law: &BranchingLaw) -> Result<BigRational> {
    let b = law.b();
    genealogy_event_probability(spec.s, law, |g, k, left, right| {
        k == b && if forced_step(spec, g) > 0 { right == k } else { left == k }
    })
}

/// `P(Z_s = b^s delta_w)` by exhaustive enumeration of the measure. For shift
/// strategies the forced prefix is the only way to reach that measure; a
/// dilation prefix can also be reached along other paths.
pub fn enumerated_target_probability(spec: &StrategySpec, law: &BranchingLaw) -> Result<BigRational> {
    let target = spec.target(law.b());
    let mut prob = BigRational::zero();
    for (config, w) in measure_distribution(spec.s, law)? {
        let zeta = crate::brw::enumerate::configuration_measure(&config, spec.s);
        if zeta == target {
            prob += w;
        }
    }
    Ok(prob)
}

/// Natural log of a positive rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if x.is_one() {
        return 0.0;
    }
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    ExtFloat::from_biguint(num).ln_abs() - ExtFloat::from_biguint(den).ln_abs()
}
