//! C ABI over `brwlab`.
//!
//! Sets and laws are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`BrwStatus`]; the message of the
//! last failure on the calling thread is available from
//! [`brw_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_traits::ToPrimitive;

use brwlab::brw::{enumerate_exact, BranchingLaw, Mode};
use brwlab::error::Error;
use brwlab::gaussian;
use brwlab::ldp::{ldp_lower_bound, strategy_prefix_logprob, Simulation, StrategySpec};
use brwlab::rate::{self, RateReport, Regime, Scale};
use brwlab::IntervalSet;

/// Opaque set handle.
pub struct BrwIntervalSet(IntervalSet);

/// Opaque offspring-law handle.
pub struct BrwBranchingLaw(BranchingLaw);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwStatus {
    Ok = 0,
    ParseError = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    EnumerationTooLarge = 4,
    CapExceeded = 5,
    Numeric = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwRegime {
    Shift = 0,
    Dilation = 1,
    Degenerate = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwScale {
    SqrtN = 0,
    N = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwMode {
    Exact = 0,
    Aggregated = 1,
    Hybrid = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwStrategyKind {
    Shift = 0,
    Dilation = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrwRateReport {
    pub p: f64,
    pub b: u32,
    pub nu_a: f64,
    /// `INFINITY` when no shift reaches `p`.
    pub i_tilde: f64,
    pub has_x_star: bool,
    pub x_star: f64,
    pub j_tilde: f64,
    pub r_star: f64,
    pub x_star_dilation: f64,
    pub i_rate: f64,
    pub j_rate: f64,
    pub regime: BrwRegime,
    pub scale: BrwScale,
    pub near_critical: bool,
    pub non_monotone: bool,
}

/// A real number that may overflow a `double`, kept through its logarithm.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrwExtReal {
    pub ln_abs: f64,
    pub negative: bool,
    /// The value as a `double`, saturating to `±INFINITY`.
    pub value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrwLdpEstimate {
    pub w: i64,
    pub q: u64,
    pub s: u64,
    pub m: u64,
    pub log_prefix: BrwExtReal,
    pub successes: u64,
    pub replicas: u64,
    pub q_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub zero_success: bool,
    pub log_neg_log: f64,
    pub theory_rate: f64,
    pub relative_gap: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BrwStatus {
    match err {
        Error::Parse { .. } => BrwStatus::ParseError,
        Error::InvalidArgument(_) => BrwStatus::InvalidArgument,
        Error::Infeasible(_) => BrwStatus::Infeasible,
        Error::EnumerationTooLarge { .. } => BrwStatus::EnumerationTooLarge,
        Error::CapExceeded { .. } => BrwStatus::CapExceeded,
        Error::Numeric(_) => BrwStatus::Numeric,
        Error::Io(_) => BrwStatus::Io,
    }
}

fn fail(status: BrwStatus, msg: impl Into<String>) -> BrwStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), BrwStatus>) -> BrwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BrwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(BrwStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: brwlab::Result<T>) -> Result<T, BrwStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, BrwStatus> {
    p.as_ref().ok_or_else(|| fail(BrwStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), BrwStatus> {
    if out.is_null() {
        return Err(fail(BrwStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, BrwStatus> {
    if s.is_null() {
        return Err(fail(BrwStatus::NullPointer, "string is null"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(BrwStatus::ParseError, "string is not UTF-8"))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn brw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn brw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn brw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses set notation such as `"(-inf,0] U [1,2)"`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_set_parse(text: *const c_char, out: *mut *mut BrwIntervalSet) -> BrwStatus {
    guard(|| {
        let set = lift(read_str(text)?.parse::<IntervalSet>())?;
        write_out(out, Box::into_raw(Box::new(BrwIntervalSet(set))))
    })
}

/// # Safety
/// `set` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn brw_set_free(set: *mut BrwIntervalSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Canonical notation of `set`; free with [`brw_string_free`]. NULL on a null handle.
///
/// # Safety
/// `set` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn brw_set_to_string(set: *const BrwIntervalSet) -> *mut c_char {
    match set.as_ref() {
        Some(s) => CString::new(s.0.to_string()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

unsafe fn derive_set(
    set: *const BrwIntervalSet,
    out: *mut *mut BrwIntervalSet,
    op: impl FnOnce(&IntervalSet) -> brwlab::Result<IntervalSet>,
) -> BrwStatus {
    guard(|| {
        let s = as_ref(set, "set")?;
        let derived = lift(op(&s.0))?;
        write_out(out, Box::into_raw(Box::new(BrwIntervalSet(derived))))
    })
}

/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_set_complement(set: *const BrwIntervalSet, out: *mut *mut BrwIntervalSet) -> BrwStatus {
    derive_set(set, out, |s| Ok(s.complement()))
}

/// Translates every point of `set` by `by`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_set_shift(
    set: *const BrwIntervalSet,
    by: f64,
    out: *mut *mut BrwIntervalSet,
) -> BrwStatus {
    derive_set(set, out, |s| Ok(s.shift(by)))
}

/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_set_scale(set: *const BrwIntervalSet, c: f64, out: *mut *mut BrwIntervalSet) -> BrwStatus {
    derive_set(set, out, |s| s.scale(c))
}

/// # Safety
/// `set` must be a live handle or NULL (which contains nothing).
#[no_mangle]
pub unsafe extern "C" fn brw_set_contains(set: *const BrwIntervalSet, t: f64) -> bool {
    set.as_ref().is_some_and(|s| s.0.contains(t))
}

/// Standard normal distribution function.
#[no_mangle]
pub extern "C" fn brw_phi(z: f64) -> f64 {
    gaussian::phi(z)
}

/// `P(S_n = k)` for the simple random walk.
#[no_mangle]
pub extern "C" fn brw_srw_pmf(n: u64, k: i64) -> f64 {
    gaussian::srw_pmf(n, k)
}

/// Gaussian measure of `set`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_nu(set: *const BrwIntervalSet, out: *mut f64) -> BrwStatus {
    guard(|| write_out(out, gaussian::nu(&as_ref(set, "set")?.0)))
}

/// `nu((A - x) / sqrt(1 - r))`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_varphi(set: *const BrwIntervalSet, r: f64, x: f64, out: *mut f64) -> BrwStatus {
    guard(|| {
        let v = lift(gaussian::varphi(&as_ref(set, "set")?.0, r, x))?;
        write_out(out, v)
    })
}

/// Law of the `n`-step simple random walk on the lattice points of `set`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_nu_n(n: u64, set: *const BrwIntervalSet, out: *mut f64) -> BrwStatus {
    guard(|| write_out(out, gaussian::nu_n_of_set(n, &as_ref(set, "set")?.0)))
}

fn report_to_c(r: &RateReport) -> BrwRateReport {
    BrwRateReport {
        p: r.p,
        b: r.b,
        nu_a: r.nu_a,
        i_tilde: r.i_tilde,
        has_x_star: r.x_star.is_some(),
        x_star: r.x_star.unwrap_or(f64::NAN),
        j_tilde: r.j_tilde,
        r_star: r.r_star,
        x_star_dilation: r.x_star_dilation,
        i_rate: r.i_rate,
        j_rate: r.j_rate,
        regime: match r.regime {
            Regime::Shift => BrwRegime::Shift,
            Regime::Dilation => BrwRegime::Dilation,
            Regime::Degenerate => BrwRegime::Degenerate,
        },
        scale: match r.scale {
            Scale::SqrtN => BrwScale::SqrtN,
            Scale::N => BrwScale::N,
        },
        near_critical: r.near_critical,
        non_monotone: r.non_monotone,
    }
}

/// Rate report for `P(Zbar_n(sqrt n A) >= p)` with minimal offspring `b`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_classify(
    set: *const BrwIntervalSet,
    p: f64,
    b: u32,
    out: *mut BrwRateReport,
) -> BrwStatus {
    guard(|| {
        let r = lift(rate::classify(&as_ref(set, "set")?.0, p, b))?;
        write_out(out, report_to_c(&r))
    })
}

/// Rate report for the lower deviation `P(Zbar_n(sqrt n A) <= p)`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_lower_tail_rate(
    set: *const BrwIntervalSet,
    p: f64,
    b: u32,
    out: *mut BrwRateReport,
) -> BrwStatus {
    guard(|| {
        let r = lift(rate::lower_tail_rate(&as_ref(set, "set")?.0, p, b))?;
        write_out(out, report_to_c(&r))
    })
}

/// Parses an offspring law such as `"2:0.5,3:0.5"`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_law_parse(text: *const c_char, out: *mut *mut BrwBranchingLaw) -> BrwStatus {
    guard(|| {
        let law = lift(read_str(text)?.parse::<BranchingLaw>())?;
        write_out(out, Box::into_raw(Box::new(BrwBranchingLaw(law))))
    })
}

/// # Safety
/// `law` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn brw_law_free(law: *mut BrwBranchingLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// Exact `P(Zbar_n(sqrt n A) >= p)` by enumeration, rounded to a double.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_enumerate_exact(
    n: u64,
    law: *const BrwBranchingLaw,
    set: *const BrwIntervalSet,
    p: f64,
    out: *mut f64,
) -> BrwStatus {
    guard(|| {
        let prob = lift(enumerate_exact(n, &as_ref(law, "law")?.0, &as_ref(set, "set")?.0, p))?;
        write_out(out, rational_to_f64(&prob))
    })
}

fn rational_to_f64(x: &impl ToPrimitive) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn spec(kind: BrwStrategyKind, x: f64, r: f64, n: u64) -> brwlab::Result<StrategySpec> {
    match kind {
        BrwStrategyKind::Shift => StrategySpec::shift(x, n),
        BrwStrategyKind::Dilation => StrategySpec::dilation(x, r, n),
    }
}

/// Log-probability of the forced prefix of a strategy.
///
/// # Safety
/// `law` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brw_strategy_prefix_logprob(
    kind: BrwStrategyKind,
    x: f64,
    r: f64,
    n: u64,
    law: *const BrwBranchingLaw,
    out: *mut BrwExtReal,
) -> BrwStatus {
    guard(|| {
        let law = as_ref(law, "law")?;
        let s = lift(spec(kind, x, r, n))?;
        let v = strategy_prefix_logprob(&s, &law.0);
        write_out(out, BrwExtReal { ln_abs: v.ln_abs(), negative: v.is_sign_negative(), value: v.to_f64() })
    })
}

/// Composed lower-bound estimate of `P(Zbar_n(sqrt n A) >= p)`. `cap` is
/// used by the hybrid mode only.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn brw_ldp_lower_bound(
    kind: BrwStrategyKind,
    x: f64,
    r: f64,
    n: u64,
    set: *const BrwIntervalSet,
    p: f64,
    law: *const BrwBranchingLaw,
    replicas: u64,
    mode: BrwMode,
    cap: u64,
    seed: u64,
    out: *mut BrwLdpEstimate,
) -> BrwStatus {
    guard(|| {
        let (set, law) = (as_ref(set, "set")?, as_ref(law, "law")?);
        let s = lift(spec(kind, x, r, n))?;
        let mode = match mode {
            BrwMode::Exact => Mode::Exact,
            BrwMode::Aggregated => Mode::Aggregated,
            BrwMode::Hybrid => Mode::Hybrid { cap },
        };
        let e = lift(ldp_lower_bound(&s, &set.0, p, &law.0, replicas, &Simulation::new(mode, seed)))?;
        write_out(
            out,
            BrwLdpEstimate {
                w: s.w,
                q: s.q,
                s: s.s,
                m: s.m,
                log_prefix: BrwExtReal {
                    ln_abs: e.log_prefix.ln_abs(),
                    negative: e.log_prefix.is_sign_negative(),
                    value: e.log_prefix.to_f64(),
                },
                successes: e.success.successes,
                replicas: e.success.replicas,
                q_hat: e.success.q_hat,
                ci_lo: e.success.ci_lo,
                ci_hi: e.success.ci_hi,
                zero_success: e.zero_success,
                log_neg_log: e.log_neg_log,
                theory_rate: e.theory_rate,
                relative_gap: e.relative_gap,
            },
        )
    })
}
