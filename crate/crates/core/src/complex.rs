use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::scalar::{Field, FloatField};

/// Complex number stored as an explicit `(re, im)` pair in any backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex<T> {
    pub re: T,
    pub im: T,
}

impl<T: Field> Complex<T> {
    pub fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }

    pub fn zero(ctx: T::Ctx) -> Self {
        Complex::new(T::zero(ctx), T::zero(ctx))
    }

    pub fn one(ctx: T::Ctx) -> Self {
        Complex::new(T::one(ctx), T::zero(ctx))
    }

    pub fn i(ctx: T::Ctx) -> Self {
        Complex::new(T::zero(ctx), T::one(ctx))
    }

    pub fn from_real(re: T) -> Self {
        let im = T::zero(re.ctx());
        Complex::new(re, im)
    }

    pub fn from_i64(v: i64, ctx: T::Ctx) -> Self {
        Complex::from_real(T::from_i64(v, ctx))
    }

    pub fn ctx(&self) -> T::Ctx {
        self.re.ctx()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> T {
        let mut n = self.re.clone() * self.re.clone();
        n.add_mul(&self.im, &self.im);
        n
    }

    pub fn scale(&self, s: &T) -> Self {
        Complex::new(self.re.clone() * s.clone(), self.im.clone() * s.clone())
    }

    pub fn div_real(&self, s: &T) -> Self {
        Complex::new(self.re.clone() / s.clone(), self.im.clone() / s.clone())
    }

    /// `self += a * b`, skipping the cross terms of real operands.
    pub fn add_mul(&mut self, a: &Self, b: &Self) {
        let a_real = a.im.is_zero();
        let b_real = b.im.is_zero();
        self.re.add_mul(&a.re, &b.re);
        if !a_real && !b_real {
            self.re.sub_mul(&a.im, &b.im);
        }
        if !b_real {
            self.im.add_mul(&a.re, &b.im);
        }
        if !a_real {
            self.im.add_mul(&a.im, &b.re);
        }
    }

    /// `self += conj(a) * b`.
    pub fn add_conj_mul(&mut self, a: &Self, b: &Self) {
        let a_real = a.im.is_zero();
        let b_real = b.im.is_zero();
        self.re.add_mul(&a.re, &b.re);
        if !a_real && !b_real {
            self.re.add_mul(&a.im, &b.im);
        }
        if !b_real {
            self.im.add_mul(&a.re, &b.im);
        }
        if !a_real {
            self.im.sub_mul(&a.im, &b.re);
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        let ctx = self.ctx();
        let mut base = if n < 0 {
            Complex::one(ctx) / self.clone()
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Complex::one(ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// `log |z|` in f64, valid far outside the f64 range.
    pub fn ln_abs_f64(&self) -> f64 {
        let lr = self.re.log2_abs();
        let li = self.im.log2_abs();
        let hi = lr.max(li);
        if hi == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let lo = lr.min(li);
        let log2 = hi + 0.5 * (1.0 + (2.0 * (lo - hi)).exp2()).log2();
        log2 * std::f64::consts::LN_2
    }
}

impl<T: FloatField> Complex<T> {
    pub fn abs(&self) -> T {
        self.re.hypot(&self.im)
    }

    pub fn arg(&self) -> T {
        self.im.atan2(&self.re)
    }

    /// `r·e^{iθ}`.
    pub fn from_polar(r: T, theta: &T) -> Self {
        Complex::new(r.clone() * theta.cos(), r * theta.sin())
    }

    /// `e^{iθ}` for real `θ`.
    pub fn cis(theta: &T) -> Self {
        Complex::new(theta.cos(), theta.sin())
    }

    pub fn exp(&self) -> Self {
        Complex::from_polar(self.re.exp(), &self.im)
    }

    pub fn from_f64_pair(re: f64, im: f64, ctx: T::Ctx) -> Self {
        Complex::new(T::from_f64(re, ctx), T::from_f64(im, ctx))
    }
}

impl<T: Field> Add for Complex<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Complex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<T: Field> Sub for Complex<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Complex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<T: Field> Mul for Complex<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Complex::zero(self.ctx());
        out.add_mul(&self, &rhs);
        out
    }
}

impl<T: Field> Div for Complex<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let den = rhs.norm_sqr();
        let mut num = Complex::zero(self.ctx());
        num.add_conj_mul(&rhs, &self);
        num.div_real(&den)
    }
}

impl<T: Field> Neg for Complex<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Complex::new(-self.re, -self.im)
    }
}

impl<T: Field> AddAssign for Complex<T> {
    fn add_assign(&mut self, rhs: Self) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl<T: Field> SubAssign for Complex<T> {
    fn sub_assign(&mut self, rhs: Self) {
        self.re -= rhs.re;
        self.im -= rhs.im;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn exact_field_operations() {
        let a = Complex::new(q(1, 2), q(3, 1));
        let b = Complex::new(q(-2, 1), q(1, 3));
        let prod = a.clone() * b.clone();
        assert_eq!(prod, Complex::new(q(-2, 1), q(-35, 6)));
        assert_eq!(prod / b, a);
        assert_eq!(a.conj().im, q(-3, 1));
    }

    #[test]
    fn powers_of_i_cycle() {
        let i = Complex::<Rational>::i(());
        assert_eq!(i.powi(4), Complex::one(()));
        assert_eq!(i.powi(-1), -i.clone());
    }

    #[test]
    fn ln_abs_beyond_f64_range() {
        let big = Complex::new(q(1, 1).powi(1), q(0, 1));
        assert_eq!(big.ln_abs_f64(), 0.0);
        let huge = Complex::from_real(Rational::from(2).powi(3000));
        let expected = 3000.0 * std::f64::consts::LN_2;
        assert!((huge.ln_abs_f64() - expected).abs() < 1e-9);
        let z = Complex::new(3.0f64, 4.0);
        assert!((z.ln_abs_f64() - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn polar_form_float() {
        let z = Complex::<f64>::cis(&std::f64::consts::FRAC_PI_2);
        assert!((z.re).abs() < 1e-16 && (z.im - 1.0).abs() < 1e-16);
        assert!((z.abs() - 1.0).abs() < 1e-16);
    }
}
