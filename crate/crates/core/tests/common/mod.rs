//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use brwlab::{Interval, IntervalSet};
use rand::Rng;
use std::f64::consts::{PI, SQRT_2};

/// `erfc` independent of the library's special functions: the positive-term
/// series `erf x = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!` below 2.5,
/// the Laplace continued fraction above, both good to a few ulps.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x < 2.5 {
        let x2 = x * x;
        let (mut term, mut sum, mut n) = (x, x, 0.0);
        while term > 1e-17 * sum {
            term *= 2.0 * x2 / (2.0 * n + 3.0);
            sum += term;
            n += 1.0;
        }
        return 1.0 - 2.0 / PI.sqrt() * (-x2).exp() * sum;
    }
    let mut t = x;
    for k in (1..=200).rev() {
        t = x + (k as f64 / 2.0) / t;
    }
    (-x * x).exp() / (PI.sqrt() * t)
}

/// Gaussian mass of `(lo, hi)` from [`erfc`], taking the tail that avoids cancellation.
pub fn gauss_mass(lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let upper = |z: f64| {
        if z == f64::INFINITY {
            0.0
        } else if z == f64::NEG_INFINITY {
            2.0
        } else {
            erfc(z / SQRT_2)
        }
    };
    if lo >= 0.0 {
        0.5 * (upper(lo) - upper(hi))
    } else if hi <= 0.0 {
        0.5 * (upper(-hi) - upper(-lo))
    } else {
        1.0 - 0.5 * upper(-lo) - 0.5 * upper(hi)
    }
}

/// `nu((A - x) / s)` summed component by component.
pub fn oracle_nu(a: &IntervalSet, x: f64, s: f64) -> f64 {
    a.parts().iter().map(|iv| gauss_mass((iv.lo - x) / s, (iv.hi - x) / s)).sum()
}

/// Random set with up to `max_parts` components and endpoints in `(-span, span)`.
/// Distinct sorted endpoints keep components apart; the outer ends become
/// half-lines with probability `p_ray` each.
pub fn random_set<R: Rng>(rng: &mut R, max_parts: usize, span: f64, p_ray: f64, min_width: f64) -> IntervalSet {
    loop {
        let k = rng.random_range(1..=max_parts);
        let mut pts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(-span..span)).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).any(|w| w[1] - w[0] < min_width) {
            continue;
        }
        if rng.random_bool(p_ray) {
            pts[0] = f64::NEG_INFINITY;
        }
        if rng.random_bool(p_ray) {
            pts[2 * k - 1] = f64::INFINITY;
        }
        let parts = pts
            .chunks(2)
            .map(|c| {
                Interval::new(
                    c[0],
                    c[1],
                    c[0].is_finite() && rng.random_bool(0.5),
                    c[1].is_finite() && rng.random_bool(0.5),
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .unwrap();
        return IntervalSet::new(parts).unwrap();
    }
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// `inf{|x| : nu(A - x) >= p}` on the grid `x in step Z`, `None` when no grid point qualifies.
pub fn brute_i_tilde(a: &IntervalSet, p: f64, step: f64) -> Option<f64> {
    let radius = a.finite_endpoint_bound() + 10.0;
    let steps = (radius / step).ceil() as i64;
    (0..=steps).find_map(|j| {
        let x = j as f64 * step;
        (oracle_nu(a, x, 1.0) >= p || oracle_nu(a, -x, 1.0) >= p).then_some(x)
    })
}

/// `sup_x nu((A - x)/s)` for bounded `A`: a grid at `100 step` over the hull,
/// then grids at `step` around the five best coarse points.
pub fn brute_dilated_sup(a: &IntervalSet, s: f64, step: f64) -> f64 {
    let (lo, hi) = a.hull().unwrap();
    let coarse = 100.0 * step;
    let n = ((hi - lo) / coarse).ceil() as i64;
    let mut vals: Vec<(f64, f64)> = (0..=n)
        .map(|j| {
            let x = lo + j as f64 * coarse;
            (oracle_nu(a, x, s), x)
        })
        .collect();
    vals.sort_by(|u, v| v.0.total_cmp(&u.0));
    let mut best = vals[0].0;
    for &(_, x0) in vals.iter().take(5) {
        for j in -100..=100 {
            best = best.max(oracle_nu(a, x0 + j as f64 * step, s));
        }
    }
    best
}

/// `inf{r : sup_x nu((A - x)/sqrt(1 - r)) >= p}` for bounded `A`: a scan at
/// `100 step` locates the first crossing, a scan at `step` refines it.
pub fn brute_j_tilde(a: &IntervalSet, p: f64, step: f64) -> Option<f64> {
    let h = |r: f64| brute_dilated_sup(a, (1.0 - r).sqrt(), step);
    if h(0.0) >= p {
        return Some(0.0);
    }
    let coarse = 100.0 * step;
    let n = (1.0 / coarse).round() as i64;
    // The last coarse cell is searched at `step` up to `1 - step`.
    let hit = (1..n).find(|&j| h(j as f64 * coarse) >= p).unwrap_or(n);
    let base = (hit - 1) as f64 * coarse;
    (1..=100).map(|j| base + j as f64 * step).take_while(|&r| r < 1.0).find(|&r| h(r) >= p)
}
