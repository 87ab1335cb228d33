//! Finite unions of intervals on the extended real line.
//!
//! An [`IntervalSet`] is always kept normalized: components are sorted,
//! pairwise disjoint, have non-empty interior, and no two components touch
//! in a way that would make them one interval. Infinite endpoints are stored
//! as `f64::INFINITY` / `f64::NEG_INFINITY` and are always open.
//!
//! Open/closed flags are invisible to the Gaussian measure but decide which
//! lattice points are counted by the random-walk law and by particle counts.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One component of an [`IntervalSet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::invalid("interval endpoint is NaN"));
        }
        if lo >= hi {
            return Err(Error::invalid(format!("interval ({lo}, {hi}) has empty interior")));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::invalid("interval lies outside the real line"));
        }
        Ok(Self::raw(lo, hi, lo_closed, hi_closed))
    }

    /// Builds without validation; infinite endpoints are forced open.
    fn raw(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() }
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above && below
    }

    /// Smallest and largest integers inside the interval, clamped to `[-bound, bound]`.
    /// Returns `None` when no integer in that window belongs to the interval.
    pub fn integer_range(&self, bound: i64) -> Option<(i64, i64)> {
        let b = bound as f64;
        let first = if self.lo == f64::NEG_INFINITY || self.lo < -b - 1.0 {
            -bound
        } else if self.lo_closed {
            self.lo.ceil() as i64
        } else {
            self.lo.floor() as i64 + 1
        };
        let last = if self.hi == f64::INFINITY || self.hi > b + 1.0 {
            bound
        } else if self.hi_closed {
            self.hi.floor() as i64
        } else {
            self.hi.ceil() as i64 - 1
        };
        let (first, last) = (first.max(-bound), last.min(bound));
        (first <= last).then_some((first, last))
    }

    fn is_degenerate(&self) -> bool {
        !(self.lo < self.hi)
    }
}

/// A normalized finite union of intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn real_line() -> Self {
        IntervalSet { parts: vec![Interval::raw(f64::NEG_INFINITY, f64::INFINITY, false, false)] }
    }

    pub fn single(iv: Interval) -> Self {
        IntervalSet { parts: vec![iv] }
    }

    /// `(-inf, x]`, the generators of the algebra.
    pub fn left_ray(x: f64) -> Self {
        Self::single(Interval::raw(f64::NEG_INFINITY, x, false, true))
    }

    /// `(x, +inf)`.
    pub fn right_ray(x: f64) -> Self {
        Self::single(Interval::raw(x, f64::INFINITY, false, false))
    }

    /// Closed interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self::single(Interval::closed(lo, hi)?))
    }

    /// Union of arbitrary (possibly overlapping) intervals.
    ///
    /// Two components that touch with both endpoints open would leave a single
    /// point in the complement, which has empty interior; such input is rejected.
    pub fn new(parts: Vec<Interval>) -> Result<Self> {
        for p in &parts {
            Interval::new(p.lo, p.hi, p.lo_closed, p.hi_closed)?;
        }
        let set = Self::normalize(parts, false);
        for w in set.parts.windows(2) {
            if w[0].hi == w[1].lo {
                return Err(Error::invalid(format!(
                    "components touch at {} with both endpoints open; the point would be isolated",
                    w[0].hi
                )));
            }
        }
        Ok(set)
    }

    /// Sort, merge overlapping or touching components. With `merge_open_touch`
    /// a both-open touch is merged too; only used after rounding in shift/scale.
    fn normalize(mut parts: Vec<Interval>, merge_open_touch: bool) -> Self {
        parts.retain(|p| !p.is_degenerate());
        parts.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap().then_with(|| b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            if let Some(cur) = out.last_mut() {
                let joins = p.lo < cur.hi || (p.lo == cur.hi && (cur.hi_closed || p.lo_closed || merge_open_touch));
                if joins {
                    if p.hi > cur.hi {
                        cur.hi = p.hi;
                        cur.hi_closed = p.hi_closed;
                    } else if p.hi == cur.hi {
                        cur.hi_closed |= p.hi_closed;
                    }
                    if p.lo == cur.lo {
                        cur.lo_closed |= p.lo_closed;
                    }
                    continue;
                }
            }
            out.push(p);
        }
        IntervalSet { parts: out }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_real_line(&self) -> bool {
        matches!(self.parts.as_slice(), [p] if p.lo == f64::NEG_INFINITY && p.hi == f64::INFINITY)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.parts.iter().any(|p| p.contains(t))
    }

    pub fn is_bounded(&self) -> bool {
        self.parts.iter().all(|p| p.lo.is_finite() && p.hi.is_finite())
    }

    pub fn has_half_line(&self) -> bool {
        !self.is_bounded()
    }

    /// Largest absolute value of a finite endpoint, 0 when there is none.
    pub fn finite_endpoint_bound(&self) -> f64 {
        self.parts.iter().flat_map(|p| [p.lo, p.hi]).filter(|e| e.is_finite()).fold(0.0, |m, e| m.max(e.abs()))
    }

    /// Convex hull `(inf S, sup S)`; `None` for the empty set.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.parts.first()?.lo, self.parts.last()?.hi))
    }

    /// Translate every component by `by`. Pass `-x` to obtain `S - x`.
    pub fn shift(&self, by: f64) -> Self {
        let parts = self.parts.iter().map(|p| Interval::raw(p.lo + by, p.hi + by, p.lo_closed, p.hi_closed)).collect();
        Self::normalize(parts, true)
    }

    /// `{c t : t in S}` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("scale factor must be positive, got {c}")));
        }
        let parts = self.parts.iter().map(|p| Interval::raw(p.lo * c, p.hi * c, p.lo_closed, p.hi_closed)).collect();
        Ok(Self::normalize(parts, true))
    }

    /// `{-t : t in S}`.
    pub fn mirror(&self) -> Self {
        let parts = self.parts.iter().rev().map(|p| Interval::raw(-p.hi, -p.lo, p.hi_closed, p.lo_closed)).collect();
        IntervalSet { parts }
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.parts.len() + 1);
        let mut lo = f64::NEG_INFINITY;
        let mut lo_closed = false;
        for p in &self.parts {
            if p.lo > lo {
                out.push(Interval::raw(lo, p.lo, lo_closed, !p.lo_closed));
            }
            lo = p.hi;
            lo_closed = !p.hi_closed;
        }
        if lo < f64::INFINITY {
            out.push(Interval::raw(lo, f64::INFINITY, lo_closed, false));
        }
        IntervalSet { parts: out }
    }

    pub fn union(&self, other: &IntervalSet) -> Self {
        let parts = self.parts.iter().chain(other.parts.iter()).copied().collect();
        Self::normalize(parts, false)
    }
}

fn fmt_endpoint(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x == f64::INFINITY {
        write!(f, "inf")
    } else if x == f64::NEG_INFINITY {
        write!(f, "-inf")
    } else {
        write!(f, "{x}")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.lo_closed { '[' } else { '(' })?;
        fmt_endpoint(f, self.lo)?;
        write!(f, ",")?;
        fmt_endpoint(f, self.hi)?;
        write!(f, "{}", if self.hi_closed { ']' } else { ')' })
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "empty");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " U ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Recursive-descent parser for `"(-inf,0] U [1,2)"`, `"R"`, `"empty"`.
struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, words: &[&str]) -> bool {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        for w in words {
            if rest.get(..w.len()).is_some_and(|head| head.eq_ignore_ascii_case(w)) {
                let after = rest[w.len()..].chars().next();
                if after.is_none_or(|c| !c.is_alphanumeric()) {
                    self.pos += w.len();
                    return true;
                }
            }
        }
        false
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let mut sign = 1.0;
        if self.peek() == Some('-') {
            sign = -1.0;
            self.pos += 1;
        } else if self.peek() == Some('+') {
            self.pos += 1;
        }
        if self.eat_word(&["infinity", "inf", "∞"]) {
            return Ok(sign * f64::INFINITY);
        }
        let digits_start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() {
            let c = bytes[self.pos];
            let exp_sign =
                (c == b'-' || c == b'+') && self.pos > digits_start && matches!(bytes[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[digits_start..self.pos];
        if text.is_empty() {
            self.pos = start.max(digits_start);
            return self.err("expected number");
        }
        match text.parse::<f64>() {
            Ok(v) => Ok(sign * v),
            Err(_) => {
                self.pos = digits_start;
                self.err(format!("malformed number '{text}'"))
            }
        }
    }

    fn interval(&mut self) -> Result<Interval> {
        self.skip_ws();
        let lo_closed = match self.peek() {
            Some('[') => true,
            Some('(') => false,
            _ => return self.err("expected '[' or '('"),
        };
        self.pos += 1;
        let start = self.pos;
        let lo = self.number()?;
        if !self.eat(',') {
            return self.err("expected ','");
        }
        let hi = self.number()?;
        self.skip_ws();
        let hi_closed = match self.peek() {
            Some(']') => true,
            Some(')') => false,
            _ => return self.err("expected ']' or ')'"),
        };
        self.pos += 1;
        Interval::new(lo, hi, lo_closed, hi_closed).map_err(|e| Error::Parse { pos: start, msg: e.to_string() })
    }

    fn set(&mut self) -> Result<IntervalSet> {
        self.skip_ws();
        let out = if self.eat_word(&["R", "ℝ", "real"]) {
            IntervalSet::real_line()
        } else if self.eat_word(&["empty", "∅"]) || self.eat_str("{}") {
            IntervalSet::empty()
        } else {
            let mut parts = vec![self.interval()?];
            while self.eat_word(&["U"]) || self.eat('∪') {
                parts.push(self.interval()?);
            }
            let pos = self.pos;
            IntervalSet::new(parts).map_err(|e| Error::Parse { pos, msg: e.to_string() })?
        };
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("unexpected trailing input");
        }
        Ok(out)
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }
}

impl FromStr for IntervalSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parser { src: s, pos: 0 }.set()
    }
}
