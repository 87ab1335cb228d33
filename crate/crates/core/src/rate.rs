//! Rate functions of the empirical-distribution large deviations.
//!
//! `i_tilde(A, p)` is the smallest shift `|x|` with `nu(A - x) >= p`;
//! `j_tilde(A, p)` is the smallest time fraction `r` for which some shift of
//! the dilated set `(A - x)/sqrt(1 - r)` reaches `p`. Multiplied by `log b`
//! they are the coefficients of `sqrt n` and `n` in `log(-log P)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gaussian::{nu, nu_affine, phi_inv, varphi};
use crate::interval::{Interval, IntervalSet};
use crate::stats::{linear_fit, LinearFit};

/// Grid step for shift and time-fraction scans.
pub const GRID_STEP: f64 = 1e-3;
/// Bisection tolerance for `i_tilde` / `j_tilde`.
pub const ROOT_TOL: f64 = 1e-9;
/// Golden-section tolerance for the shift maximizer.
pub const ARGMAX_TOL: f64 = 1e-8;
/// A supremum within this margin below `p` is treated as reaching `p`.
pub const CRITICAL_MARGIN: f64 = 1e-12;

const MAX_SUP_GRID: f64 = 4000.0;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn check_level(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("level p must lie in (0,1), got {p}")))
    }
}

fn check_nonempty(a: &IntervalSet) -> Result<()> {
    if a.is_empty() {
        Err(Error::invalid("set must be non-empty"))
    } else {
        Ok(())
    }
}

/// Supremum over `x` of `nu(A - x)` and a maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupShift {
    pub value: f64,
    /// `-inf`/`+inf` when the supremum is approached along a half-line.
    pub argmax: f64,
}

fn shifted_measure(a: &IntervalSet, x: f64) -> f64 {
    nu_affine(a, 1.0, -x).expect("unit scale is valid")
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `sup_x nu(A - x)`.
///
/// For bounded `A` the maximizer lies in the convex hull of `A` (outside it
/// every point of `A - x` moves away from the origin). The hull is gridded with
/// step `1e-3`, coarsened only when that would exceed a few thousand points and
/// the components are wide enough, and the best grid maxima are refined by
/// golden-section search.
pub fn sup_shift_measure(a: &IntervalSet) -> Result<SupShift> {
    check_nonempty(a)?;
    if a.is_real_line() {
        return Ok(SupShift { value: 1.0, argmax: 0.0 });
    }
    if a.has_half_line() {
        let argmax = if a.parts()[0].lo == f64::NEG_INFINITY { f64::NEG_INFINITY } else { f64::INFINITY };
        return Ok(SupShift { value: 1.0, argmax });
    }
    let (lo, hi) = a.hull().expect("non-empty");
    let parts = a.parts();
    let mut feature = parts.iter().map(|p| p.hi - p.lo).fold(1.0f64, f64::min);
    for w in parts.windows(2) {
        feature = feature.min(w[1].lo - w[0].hi);
    }
    let span = hi - lo;
    let step = GRID_STEP.max(span / MAX_SUP_GRID).min(feature / 4.0).max(1e-9);
    let points = (span / step).ceil() as usize + 1;
    let xs: Vec<f64> = (0..points).map(|i| (lo + i as f64 * step).min(hi)).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| shifted_measure(a, x)).collect();

    // refine the three largest discrete local maxima
    let mut peaks: Vec<usize> = (0..points)
        .filter(|&i| {
            let left = i == 0 || fs[i] >= fs[i - 1];
            let right = i + 1 == points || fs[i] >= fs[i + 1];
            left && right
        })
        .collect();
    peaks.sort_by(|&i, &j| fs[j].total_cmp(&fs[i]));
    peaks.truncate(3);
    let mut best = SupShift { value: f64::NEG_INFINITY, argmax: 0.0 };
    for i in peaks {
        let (x, v) = golden_max(|x| shifted_measure(a, x), (xs[i] - step).max(lo), (xs[i] + step).min(hi), ARGMAX_TOL);
        let (x, v) = if fs[i] > v { (xs[i], fs[i]) } else { (x, v) };
        if v > best.value || (v == best.value && x.abs() < best.argmax.abs()) {
            best = SupShift { value: v, argmax: x };
        }
    }
    Ok(best)
}

/// `I~_A(p)` with a witness shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRate {
    /// `f64::INFINITY` when no shift reaches `p`.
    pub value: f64,
    pub witness: Option<f64>,
    /// The supremum sits within [`CRITICAL_MARGIN`] of `p`.
    pub near_critical: bool,
}

/// First grid point (scanning away from 0 in direction `dir`) where
/// `nu(A - x) >= p`, refined by bisection. Returns the feasible end.
fn first_crossing(a: &IntervalSet, p: f64, dir: f64, radius: f64) -> Option<f64> {
    let f = |x: f64| shifted_measure(a, x) - p;
    let steps = (radius / GRID_STEP).ceil() as usize;
    let mut prev = 0.0;
    for i in 1..=steps {
        let x = dir * i as f64 * GRID_STEP;
        if f(x) >= 0.0 {
            return Some(bisect_feasible(f, prev, x));
        }
        prev = x;
    }
    None
}

/// Bisection between an infeasible `bad` and a feasible `good` point
/// (feasible meaning `f >= 0`); returns a feasible point within [`ROOT_TOL`].
fn bisect_feasible(f: impl Fn(f64) -> f64, mut bad: f64, mut good: f64) -> f64 {
    while (good - bad).abs() > ROOT_TOL {
        let mid = 0.5 * (good + bad);
        if f(mid) >= 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// `I~_A(p) = inf{|x| : nu(A - x) >= p}`. Ties between `+x` and `-x` resolve to `-x`.
pub fn i_tilde(a: &IntervalSet, p: f64) -> Result<ShiftRate> {
    check_level(p)?;
    check_nonempty(a)?;
    if nu(a) >= p {
        return Ok(ShiftRate { value: 0.0, witness: Some(0.0), near_critical: false });
    }
    let sup = sup_shift_measure(a)?;
    if sup.value < p - CRITICAL_MARGIN {
        return Ok(ShiftRate { value: f64::INFINITY, witness: None, near_critical: false });
    }
    let near_critical = sup.value < p + CRITICAL_MARGIN;
    let radius = a.finite_endpoint_bound() + 10.0;
    let neg = first_crossing(a, p, -1.0, radius);
    let pos = first_crossing(a, p, 1.0, radius);
    let witness = match (neg, pos) {
        (Some(n), Some(q)) => {
            if n.abs() <= q.abs() {
                n
            } else {
                q
            }
        }
        (Some(n), None) => n,
        (None, Some(q)) => q,
        (None, None) => {
            // super-level set narrower than the grid, or only reached within the margin
            let target = sup.argmax;
            if shifted_measure(a, target) >= p {
                bisect_feasible(|x| shifted_measure(a, x) - p, 0.0, target)
            } else {
                target
            }
        }
    };
    Ok(ShiftRate { value: witness.abs(), witness: Some(witness), near_critical })
}

/// `J~_A(p)` with witnesses `(r, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationRate {
    pub value: f64,
    pub r: f64,
    pub x: f64,
    /// `r -> sup_x varphi_A(r, x)` dropped back below `p` after the first crossing.
    pub non_monotone: bool,
}

/// `sup_x varphi_A(r, x)` and the maximizing `x` in original coordinates.
pub fn dilated_sup(a: &IntervalSet, r: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid(format!("r must lie in [0,1), got {r}")));
    }
    let shrink = (1.0 - r).sqrt();
    let sup = sup_shift_measure(&a.scale(1.0 / shrink)?)?;
    Ok((sup.value, sup.argmax * shrink))
}

/// `J~_A(p) = inf{r : sup_x nu((A - x)/sqrt(1 - r)) >= p}`.
///
/// Scans `r` on a `1e-3` grid for the first crossing, then bisects the
/// bracketing cell. No monotonicity in `r` is assumed; later drops below `p`
/// are reported through [`DilationRate::non_monotone`].
pub fn j_tilde(a: &IntervalSet, p: f64) -> Result<DilationRate> {
    check_level(p)?;
    check_nonempty(a)?;
    if a.is_real_line() {
        return Ok(DilationRate { value: 0.0, r: 0.0, x: 0.0, non_monotone: false });
    }
    if a.has_half_line() {
        let shift = i_tilde(a, p)?;
        let x = shift.witness.ok_or_else(|| Error::numeric("half-line set without a finite shift"))?;
        return Ok(DilationRate { value: 0.0, r: 0.0, x, non_monotone: false });
    }
    let (h0, x0) = dilated_sup(a, 0.0)?;
    if h0 >= p - CRITICAL_MARGIN {
        let x = i_tilde(a, p)?.witness.unwrap_or(x0);
        return Ok(DilationRate { value: 0.0, r: 0.0, x, non_monotone: false });
    }
    let reaches = |r: f64| dilated_sup(a, r).map(|(h, _)| h >= p);

    let mut bracket = None;
    let mut prev = 0.0;
    let grid = (1.0 / GRID_STEP).round() as usize;
    for i in 1..grid {
        let r = i as f64 * GRID_STEP;
        if reaches(r)? {
            bracket = Some((prev, r));
            break;
        }
        prev = r;
    }
    if bracket.is_none() {
        let mut gap = GRID_STEP / 2.0;
        while gap >= 1e-9 {
            let r = 1.0 - gap;
            if reaches(r)? {
                bracket = Some((prev, r));
                break;
            }
            prev = r;
            gap /= 2.0;
        }
    }
    let (mut bad, mut good) =
        bracket.ok_or_else(|| Error::numeric(format!("no dilation reaches p = {p} for r up to 1 - 1e-9")))?;
    while good - bad > ROOT_TOL {
        let mid = 0.5 * (good + bad);
        if reaches(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let (_, x) = dilated_sup(a, good)?;

    let mut non_monotone = false;
    let mut r = (good / 1e-2).ceil() * 1e-2;
    while r < 0.995 {
        if dilated_sup(a, r)?.0 < p - CRITICAL_MARGIN {
            non_monotone = true;
            break;
        }
        r += 1e-2;
    }
    Ok(DilationRate { value: good, r: good, x, non_monotone })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Shift,
    Dilation,
    /// `p <= nu(A)`: the event is typical and the shift `x = 0` already works.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    SqrtN,
    N,
}

impl Scale {
    pub fn at(self, n: f64) -> f64 {
        match self {
            Scale::SqrtN => n.sqrt(),
            Scale::N => n,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Shift => "shift",
            Regime::Dilation => "dilation",
            Regime::Degenerate => "degenerate",
        })
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::SqrtN => "sqrt_n",
            Scale::N => "n",
        })
    }
}

/// Rate coefficients and witnesses for one `(A, p, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub p: f64,
    pub b: u32,
    pub nu_a: f64,
    pub i_tilde: f64,
    pub x_star: Option<f64>,
    pub j_tilde: f64,
    pub r_star: f64,
    pub x_star_dilation: f64,
    pub i_rate: f64,
    pub j_rate: f64,
    pub regime: Regime,
    pub scale: Scale,
    pub near_critical: bool,
    pub non_monotone: bool,
}

impl RateReport {
    /// Coefficient of `scale(n)` in `log(-log P)`.
    pub fn rate(&self) -> f64 {
        match self.regime {
            Regime::Dilation => self.j_rate,
            _ => self.i_rate,
        }
    }
}

/// Rate report for `P(Zbar_n(sqrt n A) >= p)`.
pub fn classify(a: &IntervalSet, p: f64, b: u32) -> Result<RateReport> {
    check_level(p)?;
    check_nonempty(a)?;
    if b < 2 {
        return Err(Error::invalid(format!("minimal offspring b must be >= 2, got {b}")));
    }
    let log_b = (b as f64).ln();
    let nu_a = nu(a);
    let shift = i_tilde(a, p)?;
    let (regime, dil) = if p <= nu_a {
        (Regime::Degenerate, None)
    } else if shift.value.is_finite() {
        (Regime::Shift, None)
    } else {
        (Regime::Dilation, Some(j_tilde(a, p)?))
    };
    let (j, r, xd, non_monotone) = match dil {
        Some(d) => (d.value, d.r, d.x, d.non_monotone),
        None => (0.0, 0.0, shift.witness.unwrap_or(0.0), false),
    };
    Ok(RateReport {
        p,
        b,
        nu_a,
        i_tilde: shift.value,
        x_star: shift.witness,
        j_tilde: j,
        r_star: r,
        x_star_dilation: xd,
        i_rate: log_b * shift.value,
        j_rate: log_b * j,
        regime,
        scale: if regime == Regime::Dilation { Scale::N } else { Scale::SqrtN },
        near_critical: shift.near_critical,
        non_monotone,
    })
}

/// Rate report for the lower deviation `P(Zbar_n(sqrt n A) <= p)`, obtained
/// from the complement at level `1 - p`.
pub fn lower_tail_rate(a: &IntervalSet, p: f64, b: u32) -> Result<RateReport> {
    check_level(p)?;
    if a.is_real_line() {
        return Err(Error::invalid("lower tail rate is undefined for the whole line"));
    }
    classify(&a.complement(), 1.0 - p, b)
}

/// The family `A_k = x_k + r_k [-a, a]` with `x_k = k^(1+delta)` and
/// `r_k = sqrt(1 - k^(-gamma))`, `gamma = (1-alpha)(1+delta)/(alpha-1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationFamily {
    pub alpha: f64,
    pub p: f64,
    pub delta: f64,
    /// Half-width of `A_0`, solving `2 Phi(a) - 1 = p`.
    pub a: f64,
    pub gamma: f64,
}

impl InterpolationFamily {
    pub fn new(alpha: f64, p: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.5 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (1/2,1), got {alpha}")));
        }
        check_level(p)?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        let a = phi_inv(0.5 * (1.0 + p))?;
        let gamma = (1.0 - alpha) * (1.0 + delta) / (alpha - 0.5);
        Ok(InterpolationFamily { alpha, p, delta, a, gamma })
    }

    pub fn center(&self, k: u64) -> f64 {
        (k as f64).powf(1.0 + self.delta)
    }

    pub fn radius(&self, k: u64) -> f64 {
        (1.0 - (k as f64).powf(-self.gamma)).sqrt()
    }

    pub fn a0(&self) -> IntervalSet {
        IntervalSet::closed(-self.a, self.a).expect("a > 0")
    }

    /// `A_k`; fails for `k = 1` where the radius vanishes.
    pub fn component(&self, k: u64) -> Result<Interval> {
        let (c, h) = (self.center(k), self.radius(k) * self.a);
        Interval::closed(c - h, c + h)
    }

    /// The index `ceil(n^((alpha - 1/2)/(1 + delta)))` used by the lower-bound strategy.
    pub fn prescribed_k(&self, n: u64) -> u64 {
        (n as f64).powf((self.alpha - 0.5) / (1.0 + self.delta)).ceil() as u64
    }

    fn overlaps_next(&self, k: u64) -> bool {
        let h = |k| self.radius(k) * self.a;
        self.center(k) + h(k) >= self.center(k + 1) - h(k + 1)
    }

    /// Smallest `k0 >= 2` from which every component up to `k_max` is disjoint
    /// from its successor.
    pub fn min_disjoint_k0(&self, k_max: u64) -> u64 {
        (2..k_max).rev().find(|&k| self.overlaps_next(k)).map_or(2, |k| k + 1)
    }
}

/// `A_0` and the finite truncation `A_{k0} U ... U A_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationSet {
    pub family: InterpolationFamily,
    pub a0: IntervalSet,
    pub truncated: IntervalSet,
    pub k0: u64,
    pub k_max: u64,
}

pub fn interpolation_set(alpha: f64, p: f64, delta: f64, k0: u64, k_max: u64) -> Result<InterpolationSet> {
    let family = InterpolationFamily::new(alpha, p, delta)?;
    if k0 < 2 || k_max < k0 {
        return Err(Error::invalid(format!("need 2 <= k0 <= K, got k0 = {k0}, K = {k_max}")));
    }
    if let Some(k) = (k0..k_max).find(|&k| family.overlaps_next(k)) {
        return Err(Error::invalid(format!(
            "components A_{k} and A_{} overlap; raise k0 to at least {}",
            k + 1,
            family.min_disjoint_k0(k_max)
        )));
    }
    let parts = (k0..=k_max).map(|k| family.component(k)).collect::<Result<Vec<_>>>()?;
    Ok(InterpolationSet { family, a0: family.a0(), truncated: IntervalSet::new(parts)?, k0, k_max })
}

/// Cheapest feasible shift strategy onto one component at horizon `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub n: u64,
    pub k: u64,
    pub w: u64,
    /// `(log b) w`, the exponent of the strategy's cost `exp(-b^w)`.
    pub cost_exponent: f64,
    /// `nu(sqrt(n/m)(A_k - x_k))` at the chosen `k`.
    pub measure: f64,
    pub prescribed_k: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationFit {
    pub alpha_hat: f64,
    pub rows: Vec<CostRow>,
    pub fit: LinearFit,
    /// Smallest `k0` for which the family is disjoint (reported, not required).
    pub disjoint_from: u64,
}

/// Fits the growth exponent of the shift-strategy cost for the interpolation family.
///
/// For every `n`, the smallest `k >= k0` is taken whose component, after `w =
/// floor(x_k sqrt n)` forced steps, satisfies `nu(sqrt(n/m)(A_k - x_k)) >= p -
/// slack/sqrt(n)` with `m = n - w`. Since `x_k` increases with `k`, that `k`
/// minimizes `(log b) w`. The slope of `log cost` against `log n` is returned.
/// Only component-wise strategies are priced, so the family need not be disjoint.
pub fn interpolation_cost_exponent(
    alpha: f64,
    p: f64,
    delta: f64,
    k0: u64,
    n_grid: &[u64],
    b: u32,
    slack: f64,
) -> Result<InterpolationFit> {
    let family = InterpolationFamily::new(alpha, p, delta)?;
    if k0 < 2 {
        return Err(Error::invalid("k0 must be at least 2"));
    }
    if b < 2 {
        return Err(Error::invalid("b must be at least 2"));
    }
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n grid must be strictly increasing with >= 2 points"));
    }
    let log_b = (b as f64).ln();
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let sqrt_n = (n as f64).sqrt();
        let level = p - slack / sqrt_n;
        let mut chosen = None;
        for k in k0.. {
            let w = (family.center(k) * sqrt_n).floor() as u64;
            if w >= n {
                break;
            }
            let comp = IntervalSet::single(family.component(k)?);
            let measure = varphi(&comp, w as f64 / n as f64, family.center(k))?;
            if measure >= level {
                chosen = Some(CostRow {
                    n,
                    k,
                    w,
                    cost_exponent: log_b * w as f64,
                    measure,
                    prescribed_k: family.prescribed_k(n),
                });
                break;
            }
        }
        rows.push(
            chosen.ok_or_else(|| Error::Infeasible(format!("no component of the family is reachable at n = {n}")))?,
        );
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.cost_exponent.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(InterpolationFit { alpha_hat: fit.slope, rows, fit, disjoint_from: family.min_disjoint_k0(100_000) })
}
