//! Floating point numbers with an unbounded binary exponent, for quantities
//! such as `b^s` or `log P` that overflow `f64` long before they become
//! uninteresting.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// `mant * 2^exp` with `0.5 <= |mant| < 1`, or zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtFloat {
    mant: f64,
    exp: i64,
}

impl ExtFloat {
    pub const ZERO: ExtFloat = ExtFloat { mant: 0.0, exp: 0 };

    fn normalized(mant: f64, exp: i64) -> Self {
        if mant == 0.0 {
            return ExtFloat::ZERO;
        }
        let (m, e) = libm::frexp(mant);
        ExtFloat { mant: m, exp: exp + e as i64 }
    }

    /// Panics on non-finite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "ExtFloat from non-finite {x}");
        ExtFloat::normalized(x, 0)
    }

    /// Rounds to the nearest value with a 53-bit mantissa (truncating low bits).
    pub fn from_biguint(x: &BigUint) -> Self {
        let bits = x.bits();
        if bits <= 1000 {
            return ExtFloat::normalized(x.to_f64().expect("fits"), 0);
        }
        let shift = bits - 64;
        let top = (x >> shift).to_u64().expect("64 bits") as f64;
        ExtFloat::normalized(top, shift as i64)
    }

    /// `b^s` for integer base.
    pub fn powi(base: u64, s: u64) -> Self {
        let mut acc = ExtFloat::from_f64(1.0);
        let mut sq = ExtFloat::from_f64(base as f64);
        let mut k = s;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * sq;
            }
            sq = sq * sq;
            k >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    pub fn is_sign_negative(&self) -> bool {
        self.mant < 0.0
    }

    /// Natural log of the absolute value; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mant.abs().ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    /// Saturates to `±inf` or `0` outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.exp > 1100 {
            return self.mant.signum() * f64::INFINITY;
        }
        if self.exp < -1100 {
            return 0.0 * self.mant.signum();
        }
        libm::ldexp(self.mant, self.exp as i32)
    }

    pub fn abs(self) -> Self {
        ExtFloat { mant: self.mant.abs(), exp: self.exp }
    }
}

impl From<f64> for ExtFloat {
    fn from(x: f64) -> Self {
        ExtFloat::from_f64(x)
    }
}

impl Mul for ExtFloat {
    type Output = ExtFloat;
    fn mul(self, o: ExtFloat) -> ExtFloat {
        ExtFloat::normalized(self.mant * o.mant, self.exp + o.exp)
    }
}

impl Add for ExtFloat {
    type Output = ExtFloat;
    fn add(self, o: ExtFloat) -> ExtFloat {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let gap = hi.exp - lo.exp;
        if gap > 1100 {
            return hi;
        }
        ExtFloat::normalized(hi.mant + libm::ldexp(lo.mant, -gap as i32), hi.exp)
    }
}

impl Neg for ExtFloat {
    type Output = ExtFloat;
    fn neg(self) -> ExtFloat {
        ExtFloat { mant: -self.mant, exp: self.exp }
    }
}

impl PartialOrd for ExtFloat {
    fn partial_cmp(&self, o: &ExtFloat) -> Option<Ordering> {
        let (a, b) = (self.mant.signum(), o.mant.signum());
        if self.is_zero() || o.is_zero() || a != b {
            return self.mant.partial_cmp(&o.mant);
        }
        let by_mag = self.exp.cmp(&o.exp).then(self.mant.abs().total_cmp(&o.mant.abs()));
        Some(if a > 0.0 { by_mag } else { by_mag.reverse() })
    }
}

impl fmt::Display for ExtFloat {
    /// Decimal scientific notation, e.g. `-1.455603e1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let log10 = self.ln_abs() / std::f64::consts::LN_10;
        let mut e = log10.floor();
        let mut m = 10f64.powf(log10 - e);
        if m >= 9.999_999_5 {
            m /= 10.0;
            e += 1.0;
        }
        let sign = if self.mant < 0.0 { "-" } else { "" };
        write!(f, "{sign}{m:.6}e{}", e as i64)
    }
}

/// `num / den` as `f64`, correct to a few ulps for any magnitudes.
pub fn ext_ratio(num: &BigUint, den: &BigUint) -> f64 {
    if den.is_zero() {
        return f64::NAN;
    }
    if num.is_zero() {
        return 0.0;
    }
    let shift = num.bits().max(den.bits()).saturating_sub(900);
    if shift == 0 {
        return num.to_f64().expect("fits") / den.to_f64().expect("fits");
    }
    let (a, b) = ((num >> shift).to_f64().expect("fits"), (den >> shift).to_f64().expect("fits"));
    if a == 0.0 || b == 0.0 {
        return (ExtFloat::from_biguint(num).ln_abs() - ExtFloat::from_biguint(den).ln_abs()).exp();
    }
    a / b
}
