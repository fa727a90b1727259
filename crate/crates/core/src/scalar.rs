//! Real field elements behind the three arithmetic backends.
//!
//! [`Field`] is what the exact-rational backend can do (ring operations,
//! division, exact conversions). [`FloatField`] adds the transcendental and
//! rounding-aware operations the float backends need. Complex numbers are
//! built on top of these as explicit `(re, im)` pairs, see [`crate::complex`].

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::{Constant, Special};
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::Precision;

/// Exact-rational backend scalar.
pub type Exact = Rational;
/// Arbitrary-precision float backend scalar.
pub type BigFloat = Float;
/// Machine float backend scalar.
pub type Machine = f64;

/// A real field element of one backend.
///
/// `Ctx` carries whatever runtime configuration a value needs to be created
/// (the mantissa width for big floats, nothing for the others).
pub trait Field:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    type Ctx: Copy + Debug + PartialEq + Send + Sync + 'static;

    const EXACT: bool;

    fn ctx(&self) -> Self::Ctx;
    fn precision(ctx: Self::Ctx) -> Precision;

    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self {
        Self::from_i64(1, ctx)
    }
    fn from_i64(v: i64, ctx: Self::Ctx) -> Self;
    /// Correctly rounded (exact for the rational backend).
    fn from_rational(q: &Rational, ctx: Self::Ctx) -> Self;
    /// Exact for every backend with at least 53 mantissa bits.
    fn from_f64(v: f64, ctx: Self::Ctx) -> Self;
    /// The exact value as a rational, `None` for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;

    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// `log2 |self|` evaluated without overflow; `-inf` at zero.
    fn log2_abs(&self) -> f64;

    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a.clone() * b.clone();
    }
    /// `self -= a * b`.
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a.clone() * b.clone();
    }

    /// Integer power; negative exponents invert.
    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 {
            Self::one(self.ctx()) / self.clone()
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one(self.ctx());
        while e > 0 {
            if e & 1 == 1 {
                acc *= base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Lossless text form: `p/q` for rationals, round-trip decimal for floats.
    fn to_exact_string(&self) -> String;
    /// Parses `p/q`, an integer or a decimal literal into this backend.
    fn parse_str(s: &str, ctx: Self::Ctx) -> Result<Self>;
    /// Scientific notation with `digits` significant digits.
    fn to_decimal(&self, digits: usize) -> String;

    /// Squared LU pivot threshold for a matrix with squared Frobenius norm `frob_sq`.
    ///
    /// Zero for the exact backend (only exact zeros are singular).
    fn pivot_threshold_sq(frob_sq: &Self) -> Self;
}

/// Float-only operations.
pub trait FloatField: Field {
    fn mantissa_bits(ctx: Self::Ctx) -> u32;
    /// Unit roundoff `2^(1-p)`.
    fn epsilon(ctx: Self::Ctx) -> Self;
    fn pi(ctx: Self::Ctx) -> Self;
    fn infinity(ctx: Self::Ctx) -> Self;
    fn is_finite(&self) -> bool;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn hypot(&self, other: &Self) -> Self;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

/// Parses a decimal literal (`-12.5e-3`) exactly.
pub fn parse_decimal_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str_radix(&digits, 10).ok()?);
    let scale = exponent - frac_part.len() as i64;
    let power = Integer::from(Integer::u_pow_u(10, u32::try_from(scale.unsigned_abs()).ok()?));
    if scale >= 0 {
        value *= power;
    } else {
        value /= power;
    }
    if negative {
        value = -value;
    }
    Some(value)
}

/// Parses `p/q`, an integer, or a decimal literal exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.contains('/') {
        let (p, q) = t.split_once('/').unwrap();
        let p = Integer::from_str_radix(p.trim(), 10)
            .map_err(|_| Error::parse(format!("bad numerator in '{s}'")))?;
        let q = Integer::from_str_radix(q.trim(), 10)
            .map_err(|_| Error::parse(format!("bad denominator in '{s}'")))?;
        if q == 0 {
            return Err(Error::parse(format!("zero denominator in '{s}'")));
        }
        return Ok(Rational::from((p, q)));
    }
    parse_decimal_rational(t).ok_or_else(|| Error::parse(format!("not a number: '{s}'")))
}

/// True when the literal is an integer or `p/q` (as opposed to a decimal).
pub fn is_rational_literal(s: &str) -> bool {
    let t = s.trim();
    !t.is_empty() && !t.contains(['.', 'e', 'E']) && parse_rational(t).is_ok()
}

impl Field for Rational {
    type Ctx = ();
    const EXACT: bool = true;

    fn ctx(&self) {}
    fn precision(_: ()) -> Precision {
        Precision::Exact
    }
    fn zero(_: ()) -> Self {
        Rational::new()
    }
    fn from_i64(v: i64, _: ()) -> Self {
        Rational::from(v)
    }
    fn from_rational(q: &Rational, _: ()) -> Self {
        q.clone()
    }
    fn from_f64(v: f64, _: ()) -> Self {
        Rational::from_f64(v).expect("finite f64")
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
    fn abs(&self) -> Self {
        self.clone().abs()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn log2_abs(&self) -> f64 {
        if Field::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        let (mn, en) = self.numer().to_f64_exp();
        let (md, ed) = self.denom().to_f64_exp();
        mn.abs().log2() - md.log2() + f64::from(en) - f64::from(ed)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= Rational::from(a * b);
    }
    fn to_exact_string(&self) -> String {
        self.to_string()
    }
    fn parse_str(s: &str, _: ()) -> Result<Self> {
        parse_rational(s)
    }
    fn to_decimal(&self, digits: usize) -> String {
        let bits = (digits as u32) * 4 + 64;
        Float::with_val(bits, self).to_string_radix(10, Some(digits.max(1)))
    }
    fn pivot_threshold_sq(_: &Self) -> Self {
        Rational::new()
    }
}

impl Field for Float {
    type Ctx = u32;
    const EXACT: bool = false;

    fn ctx(&self) -> u32 {
        self.prec()
    }
    fn precision(bits: u32) -> Precision {
        Precision::BigFloat { bits }
    }
    fn zero(bits: u32) -> Self {
        Float::new(bits)
    }
    fn from_i64(v: i64, bits: u32) -> Self {
        Float::with_val(bits, v)
    }
    fn from_rational(q: &Rational, bits: u32) -> Self {
        Float::with_val(bits, q)
    }
    fn from_f64(v: f64, bits: u32) -> Self {
        Float::with_val(bits, v)
    }
    fn to_rational(&self) -> Option<Rational> {
        Float::to_rational(self)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn abs(&self) -> Self {
        self.clone().abs()
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
    fn log2_abs(&self) -> f64 {
        if Float::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        if !Float::is_finite(self) {
            return f64::INFINITY;
        }
        let (m, e) = self.to_f64_exp();
        m.abs().log2() + f64::from(e)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn to_exact_string(&self) -> String {
        self.to_string_radix(10, None)
    }
    fn parse_str(s: &str, bits: u32) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') {
            return Ok(Float::with_val(bits, &parse_rational(t)?));
        }
        let parsed = Float::parse(t).map_err(|e| Error::parse(format!("'{s}': {e}")))?;
        Ok(Float::with_val(bits, parsed))
    }
    fn to_decimal(&self, digits: usize) -> String {
        self.to_string_radix(10, Some(digits.max(1)))
    }
    fn pivot_threshold_sq(frob_sq: &Self) -> Self {
        // 2^-(p-3) relative to the Frobenius norm, squared.
        let p = frob_sq.prec();
        let mut t = frob_sq.clone();
        t >>= 2 * (p.saturating_sub(3));
        t
    }
}

impl FloatField for Float {
    fn mantissa_bits(bits: u32) -> u32 {
        bits
    }
    fn epsilon(bits: u32) -> Self {
        let mut e = Float::with_val(bits, 1);
        e >>= bits - 1;
        e
    }
    fn pi(bits: u32) -> Self {
        Float::with_val(bits, Constant::Pi)
    }
    fn infinity(bits: u32) -> Self {
        Float::with_val(bits, Special::Infinity)
    }
    fn is_finite(&self) -> bool {
        Float::is_finite(self)
    }
    fn sqrt(&self) -> Self {
        self.clone().sqrt()
    }
    fn ln(&self) -> Self {
        self.clone().ln()
    }
    fn exp(&self) -> Self {
        self.clone().exp()
    }
    fn sin(&self) -> Self {
        self.clone().sin()
    }
    fn cos(&self) -> Self {
        self.clone().cos()
    }
    fn atan2(&self, x: &Self) -> Self {
        self.clone().atan2(x)
    }
    fn hypot(&self, other: &Self) -> Self {
        self.clone().hypot(other)
    }
}

impl Field for f64 {
    type Ctx = ();
    const EXACT: bool = false;

    fn ctx(&self) {}
    fn precision(_: ()) -> Precision {
        Precision::Machine
    }
    fn zero(_: ()) -> Self {
        0.0
    }
    fn from_i64(v: i64, _: ()) -> Self {
        v as f64
    }
    fn from_rational(q: &Rational, _: ()) -> Self {
        q.to_f64()
    }
    fn from_f64(v: f64, _: ()) -> Self {
        v
    }
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_f64(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn log2_abs(&self) -> f64 {
        f64::abs(*self).log2()
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn to_exact_string(&self) -> String {
        // Debug prints the shortest string that reads back to the same value.
        format!("{self:?}")
    }
    fn parse_str(s: &str, _: ()) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') {
            return Ok(parse_rational(t)?.to_f64());
        }
        t.parse::<f64>()
            .map_err(|e| Error::parse(format!("'{s}': {e}")))
    }
    fn to_decimal(&self, digits: usize) -> String {
        format!("{:.*e}", digits.max(1) - 1, self)
    }
    fn pivot_threshold_sq(frob_sq: &Self) -> Self {
        frob_sq * 2f64.powi(-100)
    }
}

impl FloatField for f64 {
    fn mantissa_bits(_: ()) -> u32 {
        53
    }
    fn epsilon(_: ()) -> Self {
        f64::EPSILON
    }
    fn pi(_: ()) -> Self {
        std::f64::consts::PI
    }
    fn infinity(_: ()) -> Self {
        f64::INFINITY
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn hypot(&self, other: &Self) -> Self {
        f64::hypot(*self, *other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_parse_exactly() {
        assert_eq!(parse_rational("2.5").unwrap(), Rational::from((5, 2)));
        assert_eq!(parse_rational("-1.25e-1").unwrap(), Rational::from((-1, 8)));
        assert_eq!(parse_rational("3/2").unwrap(), Rational::from((3, 2)));
        assert_eq!(parse_rational("6/4").unwrap(), Rational::from((3, 2)));
        assert_eq!(parse_rational("12e2").unwrap(), Rational::from(1200));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn literal_classification() {
        assert!(is_rational_literal("3/2"));
        assert!(is_rational_literal("2"));
        assert!(!is_rational_literal("2.0"));
        assert!(!is_rational_literal("1e3"));
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let g = Rational::from((3, 2));
        assert_eq!(g.powi(-3), Rational::from((8, 27)));
        assert_eq!(g.powi(0), Rational::from(1));
        assert_eq!(2.0f64.powi(10), 1024.0);
        let big = Float::with_val(128, 2);
        assert_eq!(Field::powi(&big, -2), Float::with_val(128, 0.25));
    }

    #[test]
    fn log2_abs_survives_huge_values() {
        let huge = Rational::from(Integer::from(1) << 5000u32);
        assert!((huge.log2_abs() - 5000.0).abs() < 1e-9);
        let tiny = Rational::from((Integer::from(3), Integer::from(1) << 4000u32));
        assert!((tiny.log2_abs() - (3f64.log2() - 4000.0)).abs() < 1e-9);
        assert_eq!(Rational::new().log2_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn exact_strings_round_trip() {
        let q = Rational::from((-7, 3));
        assert_eq!(Rational::parse_str(&q.to_exact_string(), ()).unwrap(), q);
        let f = Float::with_val(256, 2).sqrt();
        assert_eq!(Float::parse_str(&f.to_exact_string(), 256).unwrap(), f);
        let x = 0.1f64 + 0.2;
        assert_eq!(f64::parse_str(&x.to_exact_string(), ()).unwrap(), x);
    }

    #[test]
    fn epsilon_matches_mantissa() {
        assert_eq!(Float::epsilon(64), Float::with_val(64, 2f64.powi(-63)));
        assert_eq!(<f64 as FloatField>::epsilon(()), f64::EPSILON);
    }
}
