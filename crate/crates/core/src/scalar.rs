//! Coefficient fields for exact series arithmetic.
//!
//! Every series, matrix and solver in this crate is generic over [`Coeff`].
//! Two fields are provided: the rationals ([`Rational`]) and, behind the
//! `gaussian` feature, the Gaussian rationals ([`Gaussian`]).

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{NumAssignRef, NumRef, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number, always kept in reduced form.
pub type Rational = BigRational;

/// Gaussian rational `a + bi` with `a, b` rational.
#[cfg(feature = "gaussian")]
pub type Gaussian = Complex<BigRational>;

/// An exact field usable as a series coefficient.
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + Send + Sync + 'static + NumRef + NumAssignRef + Neg<Output = Self>
{
    fn from_rational(q: Rational) -> Self;

    fn from_integer(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// Natural log of the modulus; `-inf` for zero.
    fn ln_modulus(&self) -> f64;

    /// Modulus as a float (may be `inf` for huge values).
    fn modulus(&self) -> f64 {
        self.ln_modulus().exp()
    }

    fn to_complex(&self) -> Complex<f64>;

    /// The value as a rational, when it is one.
    fn as_rational(&self) -> Option<Rational>;
}

pub(crate) fn ln_bigint(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn ln_rational(q: &Rational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    match q.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            let s = if q.is_negative() { -1.0 } else { 1.0 };
            s * ln_rational(q).exp()
        }
    }
}

impl Coeff for BigRational {
    fn from_rational(q: Rational) -> Self {
        q
    }

    fn ln_modulus(&self) -> f64 {
        ln_rational(self)
    }

    fn modulus(&self) -> f64 {
        rational_to_f64(&self.abs())
    }

    fn to_complex(&self) -> Complex<f64> {
        Complex::new(rational_to_f64(self), 0.0)
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

#[cfg(feature = "gaussian")]
impl Coeff for Complex<BigRational> {
    fn from_rational(q: Rational) -> Self {
        Complex::new(q, Rational::zero())
    }

    fn ln_modulus(&self) -> f64 {
        if self.im.is_zero() {
            return ln_rational(&self.re);
        }
        if self.re.is_zero() {
            return ln_rational(&self.im);
        }
        // ln|z| = ln|a| + ln(1 + (b/a)^2)/2 with |a| >= |b|
        let (big, small) = if self.re.abs() >= self.im.abs() {
            (&self.re, &self.im)
        } else {
            (&self.im, &self.re)
        };
        let ratio = rational_to_f64(&(small / big));
        ln_rational(big) + 0.5 * (ratio * ratio).ln_1p()
    }

    fn to_complex(&self) -> Complex<f64> {
        Complex::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn as_rational(&self) -> Option<Rational> {
        self.im.is_zero().then(|| self.re.clone())
    }
}

/// Shorthand for building a rational `num/den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse `p`, `-p` or `p/q`.
/// Serialize a rational as its `a/b` string.
pub fn serialize_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}
