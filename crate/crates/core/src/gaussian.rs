//! Standard Gaussian measure of interval sets and the exact law of the
//! simple random walk on the integer lattice.

use std::f64::consts::FRAC_1_SQRT_2;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::stats::NeumaierSum;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF, `erfc(-z/sqrt 2)/2`. Accurate in both tails.
pub fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - phi(z)` without cancellation.
pub fn phi_upper(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

pub fn density(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Inverse of [`phi`] on `(0, 1)`.
///
/// Rational initial guess (Acklam) followed by Halley steps on the erfc-based CDF.
pub fn phi_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("phi_inv needs p in (0,1), got {p}")));
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.38357751867269e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] =
        [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.54967101073872,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..3 {
        // residual on the smaller tail to keep relative accuracy
        let e = if x < 0.0 { phi(x) - p } else { (1.0 - p) - phi_upper(x) };
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn interval_mass(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        phi_upper(lo) - phi_upper(hi)
    } else {
        phi(hi) - phi(lo)
    }
}

/// `nu(S)`: standard Gaussian measure of an interval set.
pub fn nu(set: &IntervalSet) -> f64 {
    let mut acc = NeumaierSum::default();
    for p in set.parts() {
        acc.add(interval_mass(p.lo, p.hi));
    }
    acc.value().clamp(0.0, 1.0)
}

/// `nu(rho S + xi)` for `rho > 0`.
pub fn nu_affine(set: &IntervalSet, rho: f64, xi: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    let mut acc = NeumaierSum::default();
    for p in set.parts() {
        acc.add(interval_mass(rho * p.lo + xi, rho * p.hi + xi));
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// `nu((S - x)/sqrt(1 - r))` for `r` in `[0, 1)`.
pub fn varphi(set: &IntervalSet, r: f64, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid(format!("r must lie in [0,1), got {r}")));
    }
    let c = 1.0 / (1.0 - r).sqrt();
    let mut acc = NeumaierSum::default();
    for p in set.parts() {
        acc.add(interval_mass((p.lo - x) * c, (p.hi - x) * c));
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// Full row of the n-step simple random walk law, positions `-n..=n`.
///
/// Weights come from the ratio recurrence of binomial coefficients started at
/// the mode and are normalized by their compensated sum, so no factorials or
/// powers of two are ever formed.
#[derive(Debug, Clone)]
pub struct SrwRow {
    n: u64,
    /// `pmf[j]` is the probability of position `2j - n`.
    pmf: Vec<f64>,
    /// `cum[j] = pmf[0] + ... + pmf[j-1]`.
    cum: Vec<f64>,
}

impl SrwRow {
    pub fn new(n: u64) -> Self {
        let len = n as usize + 1;
        let mut w = vec![0.0f64; len];
        let mode = len / 2;
        w[mode] = 1.0;
        for j in mode..len - 1 {
            w[j + 1] = w[j] * (n - j as u64) as f64 / (j + 1) as f64;
        }
        for j in (1..=mode).rev() {
            w[j - 1] = w[j] * j as f64 / (n - j as u64 + 1) as f64;
        }
        let mut total = NeumaierSum::default();
        w.iter().for_each(|&x| total.add(x));
        let total = total.value();
        w.iter_mut().for_each(|x| *x /= total);
        let mut cum = Vec::with_capacity(len + 1);
        let mut acc = NeumaierSum::default();
        cum.push(0.0);
        for &x in &w {
            acc.add(x);
            cum.push(acc.value());
        }
        SrwRow { n, pmf: w, cum }
    }

    pub fn steps(&self) -> u64 {
        self.n
    }

    pub fn pmf(&self, k: i64) -> f64 {
        let n = self.n as i64;
        if k.abs() > n || (k + n) % 2 != 0 {
            return 0.0;
        }
        self.pmf[((k + n) / 2) as usize]
    }

    /// Row indices `j` whose positions `2j - n` fall in the integer window `[a, b]`.
    fn index_range(&self, a: i64, b: i64) -> Option<(usize, usize)> {
        let n = self.n as i64;
        let (a, b) = (a.max(-n), b.min(n));
        if a > b {
            return None;
        }
        let ja = (a + n + 1).div_euclid(2);
        let jb = (b + n).div_euclid(2);
        (ja <= jb).then_some((ja as usize, jb as usize))
    }

    fn component_mass(&self, iv: &Interval, summed: bool) -> f64 {
        let Some((a, b)) = iv.integer_range(self.n as i64) else {
            return 0.0;
        };
        let Some((ja, jb)) = self.index_range(a, b) else {
            return 0.0;
        };
        if summed {
            let mut acc = NeumaierSum::default();
            self.pmf[ja..=jb].iter().for_each(|&x| acc.add(x));
            acc.value()
        } else {
            self.cum[jb + 1] - self.cum[ja]
        }
    }

    /// Exact lattice sum of the row over the points of `set`.
    pub fn mass(&self, set: &IntervalSet) -> f64 {
        let mut acc = NeumaierSum::default();
        for p in set.parts() {
            acc.add(self.component_mass(p, true));
        }
        acc.value().clamp(0.0, 1.0)
    }

    /// Same as [`SrwRow::mass`] via prefix sums; O(components).
    pub fn mass_fast(&self, set: &IntervalSet) -> f64 {
        set.parts().iter().map(|p| self.component_mass(p, false)).sum::<f64>().clamp(0.0, 1.0)
    }
}

/// `P(S_n = k)` for the simple random walk.
pub fn srw_pmf(n: u64, k: i64) -> f64 {
    if k.unsigned_abs() > n || (k + n as i64) % 2 != 0 {
        return 0.0;
    }
    SrwRow::new(n).pmf(k)
}

/// Exact rational `P(S_n = k)`; intended as an oracle for small `n`.
pub fn srw_pmf_exact(n: u64, k: i64) -> BigRational {
    if k.unsigned_abs() > n || (k + n as i64) % 2 != 0 {
        return BigRational::from_integer(0.into());
    }
    let j = ((k + n as i64) / 2) as u64;
    let mut c = BigUint::one();
    for i in 0..j {
        c = c * (n - i) / (i + 1);
    }
    BigRational::new(c.into(), (BigUint::one() << n).into())
}

/// `nu_n(S)`: exact probability that the n-step walk lands in `S`.
/// Lattice points on open endpoints are excluded, on closed endpoints included.
pub fn nu_n_of_set(n: u64, set: &IntervalSet) -> f64 {
    SrwRow::new(n).mass(set)
}

/// Result of a CLT uniformity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformityScan {
    pub n: u64,
    pub sup_error: f64,
    pub argmax_rho: f64,
    pub argmax_xi: f64,
    /// `|xi|` was scanned up to this radius; beyond it both measures are negligible.
    pub xi_radius: f64,
    pub rho_points: usize,
    pub xi_points: usize,
}

/// `max |nu_n(sqrt n (rho S + xi)) - nu(rho S + xi)|` over a grid in
/// `rho in [1/R, R]` (log-spaced, contains 1) and `xi` on multiples of `1/sqrt n`.
pub fn clt_uniformity_scan(set: &IntervalSet, big_r: f64, n: u64, rho_points: usize) -> Result<UniformityScan> {
    if n == 0 {
        return Err(Error::invalid("uniformity scan needs n >= 1"));
    }
    if !(big_r > 1.0) {
        return Err(Error::invalid(format!("R must exceed 1, got {big_r}")));
    }
    let rho_points = rho_points.max(1) | 1;
    let row = SrwRow::new(n);
    let sqrt_n = (n as f64).sqrt();
    let xi_radius = big_r * set.finite_endpoint_bound() + 10.0;
    let xi_steps = (xi_radius * sqrt_n).floor() as i64;
    let half = (rho_points / 2) as i64;
    let mut best = (0.0f64, 1.0f64, 0.0f64);
    for i in -half..=half {
        let rho = if half == 0 { 1.0 } else { big_r.powf(i as f64 / half as f64) };
        let scaled = set.scale(rho)?;
        for k in -xi_steps..=xi_steps {
            let xi = k as f64 / sqrt_n;
            let target = scaled.shift(xi);
            let gauss = nu(&target);
            let lattice = row.mass_fast(&target.scale(sqrt_n)?);
            if gauss < 1e-12 && lattice < 1e-12 {
                continue;
            }
            let err = (lattice - gauss).abs();
            if err > best.0 {
                best = (err, rho, xi);
            }
        }
    }
    Ok(UniformityScan {
        n,
        sup_error: best.0,
        argmax_rho: best.1,
        argmax_xi: best.2,
        xi_radius,
        rho_points,
        xi_points: (2 * xi_steps + 1) as usize,
    })
}
