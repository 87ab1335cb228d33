use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Offspring law of `|Z_1|`, supported on integers `>= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingLaw {
    support: Vec<u64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    beta: f64,
    variance: f64,
}

impl BranchingLaw {
    /// Pairs `(k, P(|Z_1| = k))`; zero-probability entries are dropped.
    pub fn new(pairs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(u64, f64)> = pairs.into_iter().collect();
        for &(k, p) in &pairs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::invalid(format!("probability of {k} children is {p}")));
            }
        }
        pairs.retain(|&(_, p)| p > 0.0);
        pairs.sort_by_key(|&(k, _)| k);
        if pairs.is_empty() {
            return Err(Error::invalid("offspring law has no support"));
        }
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("offspring count listed twice"));
        }
        if pairs[0].0 < 2 {
            return Err(Error::invalid(format!(
                "every particle must have at least 2 children, law puts mass on {}",
                pairs[0].0
            )));
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("offspring probabilities sum to {total}")));
        }
        let support: Vec<u64> = pairs.iter().map(|&(k, _)| k).collect();
        let probs: Vec<f64> = pairs.iter().map(|&(_, p)| p).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        let beta: f64 = pairs.iter().map(|&(k, p)| k as f64 * p).sum();
        let variance = pairs.iter().map(|&(k, p)| p * (k as f64 - beta).powi(2)).sum();
        Ok(BranchingLaw { support, probs, cumulative, beta, variance })
    }

    pub fn deterministic(k: u64) -> Result<Self> {
        BranchingLaw::new([(k, 1.0)])
    }

    /// Two or three children with equal probability.
    pub fn binary_ternary() -> Self {
        BranchingLaw::new([(2, 0.5), (3, 0.5)]).expect("valid law")
    }

    /// Minimal offspring number.
    pub fn b(&self) -> u64 {
        self.support[0]
    }

    pub fn p_b(&self) -> f64 {
        self.probs[0]
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn max_offspring(&self) -> u64 {
        *self.support.last().expect("non-empty")
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.support.iter().position(|&s| s == k).map_or(0.0, |i| self.probs[i])
    }

    pub fn is_deterministic(&self) -> bool {
        self.support.len() == 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.support.len() == 1 {
            return self.support[0];
        }
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.support[i.min(self.support.len() - 1)]
    }

    /// Offspring counts of `c` independent particles, as multiplicities per
    /// support point (sequential conditional binomials).
    pub fn sample_multinomial<R: Rng + ?Sized>(&self, c: u64, rng: &mut R) -> Vec<u64> {
        let mut out = vec![0; self.support.len()];
        let mut left = c;
        let mut mass = 1.0;
        for (i, &p) in self.probs.iter().enumerate() {
            if left == 0 {
                break;
            }
            if i + 1 == self.probs.len() {
                out[i] = left;
                break;
            }
            let q = (p / mass).clamp(0.0, 1.0);
            let draw = Binomial::new(left, q).expect("valid binomial").sample(rng);
            out[i] = draw;
            left -= draw;
            mass -= p;
        }
        out
    }

    /// Total children of `c` independent particles, exactly in law.
    pub fn sample_sum<R: Rng + ?Sized>(&self, c: u64, rng: &mut R) -> u128 {
        self.sample_multinomial(c, rng).iter().zip(&self.support).map(|(&m, &k)| m as u128 * k as u128).sum()
    }
}

impl FromStr for BranchingLaw {
    type Err = Error;

    /// `"2:0.5,3:0.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut pos = 0;
        for item in s.split(',') {
            let bad = |msg: &str| Error::Parse { pos, msg: msg.to_string() };
            let (k, p) = item.split_once(':').ok_or_else(|| bad("expected k:prob"))?;
            let k: u64 = k.trim().parse().map_err(|_| bad("bad offspring count"))?;
            let p: f64 = p.trim().parse().map_err(|_| bad("bad probability"))?;
            pairs.push((k, p));
            pos += item.len() + 1;
        }
        BranchingLaw::new(pairs)
    }
}

impl fmt::Display for BranchingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, p)) in self.support.iter().zip(&self.probs).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}:{p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn parse_and_moments() {
        let law: BranchingLaw = "2:0.5, 3:0.5".parse().unwrap();
        assert_eq!(law.b(), 2);
        assert_eq!(law.beta(), 2.5);
        assert_eq!(law.variance(), 0.25);
        assert_eq!(law.to_string(), "2:0.5,3:0.5");
        assert!(!law.is_deterministic());
        assert!("2:1.0".parse::<BranchingLaw>().unwrap().is_deterministic());
    }

    #[test]
    fn rejects_invalid() {
        assert!("1:0.5,2:0.5".parse::<BranchingLaw>().is_err());
        assert!("2:0.5,3:0.4".parse::<BranchingLaw>().is_err());
        assert!("2:0.5,2:0.5".parse::<BranchingLaw>().is_err());
        assert!(matches!("2-1".parse::<BranchingLaw>(), Err(Error::Parse { .. })));
        assert!("2:-1,3:2".parse::<BranchingLaw>().is_err());
    }

    #[test]
    fn sampling_matches_pmf() {
        let law: BranchingLaw = "2:0.2,3:0.3,5:0.5".parse().unwrap();
        let mut rng = stream(1, "law", 0);
        let n = 200_000;
        let mut hits = [0u64; 3];
        for _ in 0..n {
            let k = law.sample(&mut rng);
            hits[law.support().iter().position(|&s| s == k).unwrap()] += 1;
        }
        for (h, p) in hits.iter().zip(law.probs()) {
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*h as f64 / n as f64 - p).abs() < 4.0 * sd);
        }
        let m = law.sample_multinomial(1_000_000, &mut rng);
        assert_eq!(m.iter().sum::<u64>(), 1_000_000);
        for (c, p) in m.iter().zip(law.probs()) {
            let sd = (p * (1.0 - p) / 1e6).sqrt();
            assert!((*c as f64 / 1e6 - p).abs() < 4.0 * sd);
        }
    }
}
