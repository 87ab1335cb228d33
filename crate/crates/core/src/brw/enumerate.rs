//! Exact law of `Z_n` for tiny instances, by summing over every offspring and
//! step configuration.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::law::BranchingLaw;
use super::measure::{compare_fraction, lattice_set, ParticleMeasure};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

/// Largest configuration count [`measure_distribution`] accepts.
pub const ENUMERATION_BOUND: f64 = 1e8;

/// Lattice measure as position -> count.
pub type Configuration = BTreeMap<i64, u64>;

/// Upper bound on the number of configurations visited: with `o` outcomes
/// (offspring number and number of right steps) per particle and at most
/// `K^g` particles in generation `g`, the product of `o^(K^g)`.
pub fn enumeration_size(n: u64, law: &BranchingLaw) -> f64 {
    let outcomes: u64 = law.support().iter().map(|k| k + 1).sum();
    let k = law.max_offspring() as f64;
    let log_size: f64 = (0..n).map(|g| k.powi(g as i32) * (outcomes as f64).ln()).sum();
    log_size.exp()
}

fn binomial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn exact(p: f64) -> BigRational {
    BigRational::from_float(p).expect("finite probability")
}

/// Law of `(left, right)` children of one particle. The binary offspring
/// probabilities are renormalized so that they sum to one exactly.
fn particle_outcomes(law: &BranchingLaw) -> Vec<((u64, u64), BigRational)> {
    let mass: BigRational = law.probs().iter().map(|&p| exact(p)).sum();
    let mut out = Vec::new();
    for (&k, &p) in law.support().iter().zip(law.probs()) {
        let denom = BigUint::one() << k as u32;
        for right in 0..=k {
            let w = exact(p) / &mass * BigRational::new(binomial(k, right).into(), denom.clone().into());
            out.push(((k - right, right), w));
        }
    }
    out
}

fn add_to(map: &mut BTreeMap<Configuration, BigRational>, key: Configuration, w: BigRational) {
    let slot = map.entry(key).or_insert_with(BigRational::zero);
    *slot += w;
}

/// Exact law of `Z_n` from a single particle at the origin.
pub fn measure_distribution(n: u64, law: &BranchingLaw) -> Result<Vec<(Configuration, BigRational)>> {
    let size = enumeration_size(n, law);
    if size > ENUMERATION_BOUND {
        return Err(Error::EnumerationTooLarge { states: size, bound: ENUMERATION_BOUND });
    }
    let outcomes = particle_outcomes(law);
    let mut layer: BTreeMap<Configuration, BigRational> = BTreeMap::new();
    layer.insert(Configuration::from([(0, 1)]), BigRational::one());
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (config, weight) in &layer {
            let mut partial: BTreeMap<Configuration, BigRational> = BTreeMap::new();
            partial.insert(Configuration::new(), weight.clone());
            for (&x, &c) in config {
                for _ in 0..c {
                    let mut grown = BTreeMap::new();
                    for (acc, w) in &partial {
                        for ((left, right), q) in &outcomes {
                            let mut key = acc.clone();
                            if *left > 0 {
                                *key.entry(x - 1).or_insert(0) += left;
                            }
                            if *right > 0 {
                                *key.entry(x + 1).or_insert(0) += right;
                            }
                            add_to(&mut grown, key, w * q);
                        }
                    }
                    partial = grown;
                }
            }
            for (key, w) in partial {
                add_to(&mut next, key, w);
            }
        }
        layer = next;
    }
    Ok(layer.into_iter().collect())
}

/// Probability that every particle of generations `0..s` satisfies
/// `accept(generation, children, left, right)`, by walking every joint
/// outcome of every genealogy. The total mass of the walk is checked to be one.
pub fn genealogy_event_probability(
    s: u64,
    law: &BranchingLaw,
    accept: impl Fn(u64, u64, u64, u64) -> bool,
) -> Result<BigRational> {
    let size = enumeration_size(s, law);
    if size > ENUMERATION_BOUND {
        return Err(Error::EnumerationTooLarge { states: size, bound: ENUMERATION_BOUND });
    }
    if s == 0 {
        return Ok(BigRational::one());
    }
    let outcomes = particle_outcomes(law);
    let mut walk = GenealogyWalk {
        s,
        outcomes: &outcomes,
        accept: &accept,
        event: BigRational::zero(),
        total: BigRational::zero(),
    };
    walk.visit(0, 1, 0, 0, true, BigRational::one());
    if !walk.total.is_one() {
        return Err(Error::numeric(format!("genealogy enumeration lost mass: {}", walk.total)));
    }
    Ok(walk.event)
}

struct GenealogyWalk<'a, F> {
    s: u64,
    outcomes: &'a [((u64, u64), BigRational)],
    accept: &'a F,
    event: BigRational,
    total: BigRational,
}

impl<F: Fn(u64, u64, u64, u64) -> bool> GenealogyWalk<'_, F> {
    /// Particle `idx` of `count` in generation `g`; `next` children so far.
    fn visit(&mut self, g: u64, count: u64, idx: u64, next: u64, ok: bool, w: BigRational) {
        if idx == count {
            if g + 1 == self.s {
                if ok {
                    self.event += &w;
                }
                self.total += w;
            } else {
                self.visit(g + 1, next, 0, 0, ok, w);
            }
            return;
        }
        for ((left, right), pw) in self.outcomes {
            let k = left + right;
            let ok = ok && (self.accept)(g, k, *left, *right);
            self.visit(g, count, idx + 1, next + k, ok, &w * pw);
        }
    }
}

/// `P(Zbar_n(sqrt n A) >= p)` as an exact rational; `p` is read as its exact binary value.
pub fn enumerate_exact(n: u64, law: &BranchingLaw, a: &IntervalSet, p: f64) -> Result<BigRational> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("level p must lie in [0,1], got {p}")));
    }
    let set = lattice_set(a, n, 0);
    let mut prob = BigRational::zero();
    for (config, w) in measure_distribution(n, law)? {
        let zeta = configuration_measure(&config, n);
        if compare_fraction(&zeta.count_in(&set), zeta.total(), p, false) {
            prob += w;
        }
    }
    Ok(prob)
}

pub fn configuration_measure(config: &Configuration, generation: u64) -> ParticleMeasure {
    ParticleMeasure::from_counts(generation, config.iter().map(|(&x, &c)| (x, BigUint::from(c))))
        .expect("configurations carry mass")
}
