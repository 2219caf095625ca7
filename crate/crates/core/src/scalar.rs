//! Coefficient fields.
//!
//! Two regimes are supported: exact Gaussian rationals ([`GaussRat`]) for
//! every symbolic check, and complex doubles ([`Complex64`]) for numeric
//! flows. Polynomials are generic over [`Scalar`], so a single polynomial never
//! mixes the two.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Which coefficient regime a scalar type lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Exact,
    Approx,
}

pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const REGIME: Regime;

    fn from_i64(v: i64) -> Self;

    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    fn to_complex(&self) -> Complex64;

    /// The value as a machine integer, when it is one.
    fn as_integer(&self) -> Option<i64>;

    /// Whether a leading minus sign should be pulled out when printing.
    fn is_negative_like(&self) -> bool {
        false
    }

    /// Whether the printed value can multiply a monomial without parentheses.
    fn is_atomic(&self) -> bool {
        false
    }

    /// Whether the printed value contains an inner sign (needs parentheses even alone).
    fn is_compound(&self) -> bool {
        true
    }

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

/// Exact Gaussian rational `re + im·i` with both parts reduced fractions.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    pub fn int(v: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num/den`; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn i() -> Self {
        GaussRat { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.im.is_zero() && self.re.is_integer()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `re² + im²`.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Least common multiple of the two denominators.
    pub fn denom_lcm(&self) -> BigInt {
        num_integer::Integer::lcm(self.re.denom(), self.im.denom())
    }

    /// Closest Gaussian rational with denominators `2^k` to a complex double.
    /// Used when numeric data must be fed back into the exact regime.
    pub fn from_f64_exact(re: f64, im: f64) -> Option<Self> {
        Some(GaussRat {
            re: BigRational::from_float(re)?,
            im: BigRational::from_float(im)?,
        })
    }

}

fn fmt_rational(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

/// Grammar-conformant text: `3`, `-1/2`, `2i`, `1/2+2i`, `-i`.
impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rational(f, &self.re);
        }
        let im_abs = self.im.abs();
        if !self.re.is_zero() {
            fmt_rational(f, &self.re)?;
            f.write_str(if self.im.is_negative() { "-" } else { "+" })?;
        } else if self.im.is_negative() {
            f.write_str("-")?;
        }
        if !im_abs.is_one() {
            fmt_rational(f, &im_abs)?;
        }
        f.write_str("i")
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for GaussRat {
    type Err = crate::poly::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = crate::poly::parse(s, 0)?;
        Ok(p.constant_term())
    }
}

impl Serialize for GaussRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GaussRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        GaussRat { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        GaussRat { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, o: GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat::real(self.re * o.re);
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        GaussRat::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        GaussRat::int(1)
    }
}

impl Scalar for GaussRat {
    const REGIME: Regime = Regime::Exact;

    fn from_i64(v: i64) -> Self {
        GaussRat::int(v)
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(GaussRat::real(self.re.recip()));
        }
        let n = self.norm_sqr();
        Some(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }

    fn is_negative_like(&self) -> bool {
        self.re.is_negative() || (self.re.is_zero() && self.im.is_negative())
    }

    fn is_atomic(&self) -> bool {
        (self.im.is_zero() && self.re.is_integer()) || (self.re.is_zero() && self.im.is_integer())
    }

    fn as_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.re.numer().to_i64()
        } else {
            None
        }
    }

    fn is_compound(&self) -> bool {
        !self.re.is_zero() && !self.im.is_zero()
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl Scalar for Complex64 {
    const REGIME: Regime = Regime::Approx;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn as_integer(&self) -> Option<i64> {
        (self.im == 0.0 && self.re.fract() == 0.0 && self.re.abs() < 9.0e15).then_some(self.re as i64)
    }

    fn is_negative_like(&self) -> bool {
        self.re < 0.0 || (self.re == 0.0 && self.im < 0.0)
    }
}
