use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ext::{ext_ratio, ExtFloat};
use crate::interval::IntervalSet;

/// Finite point measure on the integer lattice with arbitrary-precision masses.
///
/// `counts[i]` is the mass at `offset + i`; both ends of `counts` are non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleMeasure {
    offset: i64,
    counts: Vec<BigUint>,
    total: BigUint,
    generation: u64,
}

impl ParticleMeasure {
    /// `count` particles at `position`.
    pub fn delta(position: i64, count: impl Into<BigUint>, generation: u64) -> Result<Self> {
        let count = count.into();
        if count.is_zero() {
            return Err(Error::invalid("particle measure must have positive mass"));
        }
        Ok(ParticleMeasure { offset: position, total: count.clone(), counts: vec![count], generation })
    }

    /// A single particle at the origin, generation 0.
    pub fn root() -> Self {
        ParticleMeasure::delta(0, 1u32, 0).expect("positive")
    }

    pub fn from_counts(generation: u64, counts: impl IntoIterator<Item = (i64, BigUint)>) -> Result<Self> {
        let mut pairs: Vec<(i64, BigUint)> = counts.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if pairs.is_empty() {
            return Err(Error::invalid("particle measure must have positive mass"));
        }
        pairs.sort_by_key(|(x, _)| *x);
        let lo = pairs[0].0;
        let hi = pairs[pairs.len() - 1].0;
        let width = usize::try_from(hi - lo + 1).map_err(|_| Error::invalid("particle measure support too wide"))?;
        let mut dense = vec![BigUint::zero(); width];
        for (x, c) in pairs {
            dense[(x - lo) as usize] += c;
        }
        Ok(ParticleMeasure::from_dense(lo, dense, generation))
    }

    /// Trims zero ends; panics if all masses vanish.
    pub(crate) fn from_dense(offset: i64, counts: Vec<BigUint>, generation: u64) -> Self {
        let first = counts.iter().position(|c| !c.is_zero()).expect("positive mass");
        let last = counts.iter().rposition(|c| !c.is_zero()).expect("positive mass");
        let counts: Vec<BigUint> = counts.into_iter().skip(first).take(last - first + 1).collect();
        let total = counts.iter().sum();
        ParticleMeasure { offset: offset + first as i64, counts, total, generation }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// Total as `u64` when it fits.
    pub fn total_u64(&self) -> Option<u64> {
        self.total.to_u64()
    }

    pub fn ln_total(&self) -> f64 {
        ExtFloat::from_biguint(&self.total).ln_abs()
    }

    pub fn min_position(&self) -> i64 {
        self.offset
    }

    pub fn max_position(&self) -> i64 {
        self.offset + self.counts.len() as i64 - 1
    }

    pub fn count_at(&self, x: i64) -> BigUint {
        usize::try_from(x - self.offset).ok().and_then(|i| self.counts.get(i).cloned()).unwrap_or_default()
    }

    /// Occupied positions with their masses, left to right.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigUint)> + '_ {
        self.counts.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (self.offset + i as i64, c))
    }

    pub(crate) fn dense(&self) -> (i64, &[BigUint]) {
        (self.offset, &self.counts)
    }

    /// Every occupied position has the parity of `parity`.
    pub fn parity_consistent(&self, parity: i64) -> bool {
        self.iter().all(|(x, _)| (x - parity).rem_euclid(2) == 0)
    }

    /// Mass of the lattice points in `set`, respecting open and closed endpoints.
    pub fn count_in(&self, set: &IntervalSet) -> BigUint {
        let bound = self.offset.abs().max(self.max_position().abs());
        let mut acc = BigUint::zero();
        for part in set.parts() {
            if let Some((a, b)) = part.integer_range(bound) {
                let a = a.max(self.offset);
                let b = b.min(self.max_position());
                for x in a..=b {
                    acc += &self.counts[(x - self.offset) as usize];
                }
            }
        }
        acc
    }

    /// `Z(set) / |Z|`.
    pub fn fraction_in(&self, set: &IntervalSet) -> f64 {
        ext_ratio(&self.count_in(set), &self.total)
    }

    /// Exact test of `Z(set) >= level |Z|` (or `>` when `strict`), with `level` taken as the exact binary value.
    pub fn fraction_exceeds(&self, set: &IntervalSet, level: f64, strict: bool) -> bool {
        let inside = self.count_in(set);
        compare_fraction(&inside, &self.total, level, strict)
    }

    /// `sum x Z({x}) / |Z|`.
    pub fn mean_position(&self) -> f64 {
        let (mut pos, mut neg) = (BigUint::zero(), BigUint::zero());
        for (x, c) in self.iter() {
            let w = c * x.unsigned_abs();
            if x >= 0 {
                pos += w;
            } else {
                neg += w;
            }
        }
        ext_ratio(&pos, &self.total) - ext_ratio(&neg, &self.total)
    }

    /// The measure translated by `by`.
    pub fn translated(&self, by: i64) -> Self {
        ParticleMeasure { offset: self.offset + by, ..self.clone() }
    }

    /// Lines `"position count"`, left to right.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for (x, c) in self.iter() {
            writeln!(out, "{x} {c}").expect("string write");
        }
        out
    }

    pub fn parse_snapshot(text: &str, generation: u64) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut pos = 0;
        for line in text.lines() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                let bad = |msg: &str| Error::Parse { pos, msg: msg.to_string() };
                let (x, c) = t.split_once(char::is_whitespace).ok_or_else(|| bad("expected position and count"))?;
                let x: i64 = x.parse().map_err(|_| bad("bad position"))?;
                let c: BigUint = c.trim().parse().map_err(|_| bad("bad count"))?;
                pairs.push((x, c));
            }
            pos += line.len() + 1;
        }
        ParticleMeasure::from_counts(generation, pairs)
    }
}

/// `inside / total >= level` (or `>`) in exact arithmetic.
pub(crate) fn compare_fraction(inside: &BigUint, total: &BigUint, level: f64, strict: bool) -> bool {
    if level.is_nan() {
        return false;
    }
    if level <= 0.0 {
        return !strict || !inside.is_zero() || level < 0.0;
    }
    if level > 1.0 {
        return false;
    }
    let (mant, exp, _) = num_traits::Float::integer_decode(level);
    let (lhs, rhs) =
        if exp < 0 { (inside << (-exp) as u32, total * mant) } else { (inside.clone(), (total * mant) << exp as u32) };
    if strict {
        lhs > rhs
    } else {
        lhs >= rhs
    }
}

/// `Z_n(sqrt n A) / |Z_n|` for a measure at generation `n`. For `n = 0` the
/// scaled set is `{0}` when `A` is non-empty.
pub fn empirical_fraction(zeta: &ParticleMeasure, n: u64, a: &IntervalSet) -> f64 {
    zeta.fraction_in(&lattice_set(a, n, 0))
}

/// `sqrt(n) A - w`, the set whose lattice points count towards the event.
pub fn lattice_set(a: &IntervalSet, n: u64, w: i64) -> IntervalSet {
    if n == 0 {
        return if a.contains(0.0) {
            IntervalSet::closed(-0.5, 0.5).expect("valid").shift(-(w as f64))
        } else {
            IntervalSet::empty()
        };
    }
    a.scale((n as f64).sqrt()).expect("positive scale").shift(-(w as f64))
}
