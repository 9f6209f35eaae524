//! Scalar types: exact rationals, 256-bit binary floats and plain `f64`.

use alloc::string::{String, ToString};
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use dashu_base::{BitTest, Sign, UnsignedAbs};
use dashu_float::ops::SquareRoot;
use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use dashu_int::IBig;
use dashu_ratio::RBig;

/// Exact rational scalar.
pub type Rational = RBig;

/// Binary float with a 256-bit mantissa and (effectively) unbounded exponent.
pub type Float = FBig<HalfEven>;

/// Mantissa bits carried by [`Float`] values.
pub const PRECISION: usize = 256;

/// Field operations shared by every scalar mode.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn is_zero(&self) -> bool;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Ordered approximate scalars used by the numerical routines.
pub trait Real: Scalar {
    fn sqrt(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn from_f64(v: f64) -> Self;
    /// `self * 2^e`, exact.
    fn mul_pow2(&self, e: i64) -> Self;
    /// Base-2 logarithm of `|self|`, accurate to about 1e-15 relative; `-inf` at zero.
    fn log2(&self) -> f64;
    /// Exponent `e` with `2^(e-1) <= |self| < 2^e`; `None` at zero.
    fn binary_exponent(&self) -> Option<i64>;
}

impl Scalar for Rational {
    fn zero() -> Self {
        RBig::ZERO
    }
    fn one() -> Self {
        RBig::ONE
    }
    fn from_i64(v: i64) -> Self {
        RBig::from(v)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        *self == RBig::ZERO
    }
}

/// Lifts an integer into a full-precision [`Float`].
pub fn float_int(v: i64) -> Float {
    Float::from(v).with_precision(PRECISION).value()
}

/// Rounds a rational to the nearest [`Float`].
pub fn float_from_rational(q: &Rational) -> Float {
    q.to_float::<HalfEven, 2>(PRECISION).value()
}

/// Exact rational value of a [`Float`] (a dyadic fraction).
pub fn rational_from_float(x: &Float) -> Rational {
    RBig::try_from(x.clone()).expect("finite float")
}

/// Simplest rational that rounds to the same [`Float`]; falls back to the exact dyadic value.
pub fn simplest_rational(x: &Float) -> Rational {
    if x.repr().is_zero() {
        return RBig::ZERO;
    }
    RBig::simplest_from_float(x).unwrap_or_else(|| rational_from_float(x))
}

impl Scalar for Float {
    fn zero() -> Self {
        float_int(0)
    }
    fn one() -> Self {
        float_int(1)
    }
    fn from_i64(v: i64) -> Self {
        float_int(v)
    }
    fn from_rational(q: &Rational) -> Self {
        float_from_rational(q)
    }
    fn is_zero(&self) -> bool {
        self.repr().is_zero()
    }
}

impl Real for Float {
    fn sqrt(&self) -> Self {
        SquareRoot::sqrt(self)
    }
    fn to_f64(&self) -> f64 {
        FBig::to_f64(self).value()
    }
    fn from_f64(v: f64) -> Self {
        Float::try_from(v)
            .expect("finite f64")
            .with_precision(PRECISION)
            .value()
    }
    fn mul_pow2(&self, e: i64) -> Self {
        let repr = self.repr();
        let shifted = dashu_float::Repr::<2>::new(
            repr.significand().clone(),
            repr.exponent() + e as isize,
        );
        FBig::from_repr(shifted, self.context())
    }
    fn log2(&self) -> f64 {
        let repr = self.repr();
        if repr.is_zero() {
            return f64::NEG_INFINITY;
        }
        let sig = repr.significand();
        let bits = sig.clone().unsigned_abs().bit_len() as i64;
        // keep the top 64 bits of the significand so the f64 conversion is exact enough
        let drop = (bits - 64).max(0);
        let top: IBig = sig.clone() >> drop as usize;
        let top = top.to_f64().value().abs();
        libm::log2(top) + (drop + repr.exponent() as i64) as f64
    }
    fn binary_exponent(&self) -> Option<i64> {
        let repr = self.repr();
        if repr.is_zero() {
            return None;
        }
        Some(repr.significand().clone().unsigned_abs().bit_len() as i64 + repr.exponent() as i64)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_f64().value()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Real for f64 {
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn mul_pow2(&self, e: i64) -> Self {
        libm::ldexp(*self, e as i32)
    }
    fn log2(&self) -> f64 {
        libm::log2(self.abs())
    }
    fn binary_exponent(&self) -> Option<i64> {
        if *self == 0.0 {
            return None;
        }
        let (_, e) = libm::frexp(*self);
        Some(e as i64)
    }
}

/// Parses `"p"`, `"p/q"` or a decimal literal such as `"-1.25"` or `"1e-3"` into a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: IBig = num.trim().parse().ok()?;
        let den: IBig = den.trim().parse().ok()?;
        if den == IBig::ZERO {
            return None;
        }
        return Some(RBig::from_parts_signed(num, den));
    }
    if let Ok(v) = s.parse::<IBig>() {
        return Some(RBig::from(v));
    }
    let d: DBig = s.parse().ok()?;
    RBig::try_from(d).ok()
}

/// Canonical text form of a rational: `"p"` or `"p/q"` with `q > 0` and `gcd(p, q) = 1`.
pub fn format_rational(q: &Rational) -> String {
    if q.denominator().is_one() {
        q.numerator().to_string()
    } else {
        alloc::format!("{}/{}", q.numerator(), q.denominator())
    }
}

/// Scientific notation with exactly `digits` significant digits, e.g.
/// `format_float(100, 3) == "1.00e2"`.
pub fn format_float(x: &Float, digits: usize) -> String {
    if x.repr().is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let d = x.to_decimal().value().with_precision(digits).value();
    let sig = d.repr().significand();
    let mut text = sig.clone().unsigned_abs().to_string();
    let exp = d.repr().exponent() + text.len() as isize - 1;
    text.truncate(digits);
    while text.len() < digits {
        text.push('0');
    }
    let sign = if sig.sign() == Sign::Negative { "-" } else { "" };
    let (head, tail) = text.split_at(1);
    if tail.is_empty() {
        alloc::format!("{sign}{head}e{exp}")
    } else {
        alloc::format!("{sign}{head}.{tail}e{exp}")
    }
}

/// Parses a decimal or rational literal into a [`Float`].
pub fn parse_float(s: &str) -> Option<Float> {
    parse_rational(s).map(|q| float_from_rational(&q))
}

/// `true` when `x < 0` (and nonzero).
pub fn is_negative(x: &Float) -> bool {
    !x.repr().is_zero() && x.repr().significand().sign() == Sign::Negative
}

/// `2^e` as a [`Float`].
pub fn pow2(e: i64) -> Float {
    float_int(1).mul_pow2(e)
}

/// Converts a rational to `f64` (rounding).
pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().value()
}

/// Closest simple rational to `x` within `tol` (absolute).
pub fn snap(x: f64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    if x.abs() <= tol {
        return Some(RBig::ZERO);
    }
    let lo = RBig::try_from(x - tol).ok()?;
    let hi = RBig::try_from(x + tol).ok()?;
    Some(RBig::simplest_in(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "7", "-3/4", "12/5"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(format_rational(&parse_rational("6/8").unwrap()), "3/4");
        assert_eq!(format_rational(&parse_rational("-1.25").unwrap()), "-5/4");
        assert_eq!(format_rational(&parse_rational("1e3").unwrap()), "1000");
        assert!(parse_rational("x").is_none());
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn float_text_has_fixed_digits() {
        assert_eq!(format_float(&float_int(100), 3), "1.00e2");
        assert_eq!(format_float(&float_int(-5), 1), "-5e0");
        assert_eq!(format_float(&Float::from_f64(0.125), 4), "1.250e-1");
        let x = Real::sqrt(&float_int(2)).mul_pow2(-70);
        let back = parse_float(&format_float(&x, 40)).unwrap();
        let rel = Real::to_f64(&((back - x.clone()) / x).abs());
        assert!(rel < 1e-38);
    }

    #[test]
    fn float_log2_handles_huge_values() {
        let x = pow2(5000).mul_pow2(0) * float_int(3);
        let l = Real::log2(&x);
        assert!((l - (5000.0 + libm::log2(3.0))).abs() < 1e-9);
        assert_eq!(x.binary_exponent(), Some(5002));
        assert_eq!(Real::log2(&float_int(8)), 3.0);
    }

    #[test]
    fn float_rational_conversions() {
        let third = float_int(1) / float_int(3);
        assert_eq!(format_rational(&simplest_rational(&third)), "1/3");
        assert_eq!(rational_from_float(&float_int(5)), RBig::from(5));
        assert!(is_negative(&-third.clone()));
        assert!(!is_negative(&Float::zero()));
        assert_eq!(format_float(&float_int(1234), 3), "1.23e3");
    }

    #[test]
    fn snapping_finds_small_denominators() {
        assert_eq!(format_rational(&snap(0.3333333333, 1e-8).unwrap()), "1/3");
        assert_eq!(format_rational(&snap(-2.5000001, 1e-6).unwrap()), "-5/2");
        assert_eq!(snap(1e-12, 1e-9).unwrap(), RBig::ZERO);
    }
}
