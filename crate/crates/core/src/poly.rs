//! Sparse multivariate polynomials over a [`Scalar`] field.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Exponent`], whose ordering is
//! graded lexicographic with `x1 > x2 > … > xn`. Zero coefficients are never
//! stored, so structural equality is mathematical equality.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{GaussRat, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error("map has {got} components, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VarOutOfRange { index: usize, nvars: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Exponent vector of a monomial.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(e: Vec<u32>) -> Self {
        Exponent(e)
    }

    pub fn zero(nvars: usize) -> Self {
        Exponent(vec![0; nvars])
    }

    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Exponent(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, o: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// `self / o` when `o` divides `self`.
    pub fn checked_div(&self, o: &Exponent) -> Option<Exponent> {
        self.0
            .iter()
            .zip(&o.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Exponent)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Sparse polynomial in `nvars` variables.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly<C> {
    nvars: usize,
    terms: BTreeMap<Exponent, C>,
}

pub type ExactPoly = Poly<GaussRat>;

impl<C: Scalar> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, Exponent::zero(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    /// The coordinate function `x_{i+1}` (indices are zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range");
        Self::monomial(nvars, Exponent::unit(nvars, i), C::one())
    }

    pub fn monomial(nvars: usize, e: Exponent, c: C) -> Self {
        assert_eq!(e.len(), nvars);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Poly { nvars, terms }
    }

    /// Builds from `(exponent, coefficient)` pairs, summing duplicates.
    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Exponent, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().next_back().map_or(-1, |e| e.degree() as i64)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn leading_term(&self) -> Option<(&Exponent, &C)> {
        self.terms.iter().next_back()
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Exponent::zero(self.nvars))
    }

    pub fn is_constant(&self) -> bool {
        self.degree() <= 0
    }

    pub fn add_term(&mut self, e: Exponent, c: C) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&e) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(e, s);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    /// Whether any term involves variable `i`.
    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e.get(i) > 0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e.get(i)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter_map(|(e, a)| {
                    let v = a.clone() * c.clone();
                    (!v.is_zero()).then(|| (e.clone(), v))
                })
                .collect(),
        }
    }

    /// Multiplies by a monomial `c·x^e`.
    pub fn mul_monomial(&self, e: &Exponent, c: &C) -> Self {
        let mut out = Self::scale(self, c);
        out.terms = out.terms.into_iter().map(|(k, v)| (k.add(e), v)).collect();
        out
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial_derivative(&self, i: usize) -> Self {
        assert!(i < self.nvars, "variable index {i} out of range");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e.get(i);
            if k == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne.0[i] -= 1;
            out.add_term(ne, c.clone() * C::from_i64(k as i64));
        }
        out
    }

    pub fn checked_partial_derivative(&self, i: usize) -> Result<Self, PolyError> {
        if i >= self.nvars {
            return Err(PolyError::VarOutOfRange { index: i, nvars: self.nvars });
        }
        Ok(self.partial_derivative(i))
    }

    fn check_nvars(&self, o: &Self) -> Result<(), PolyError> {
        if self.nvars != o.nvars {
            Err(PolyError::NvarsMismatch { left: self.nvars, right: o.nvars })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, PolyError> {
        self.check_nvars(o)?;
        Ok(self + o)
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, PolyError> {
        self.check_nvars(o)?;
        Ok(self - o)
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, PolyError> {
        self.check_nvars(o)?;
        Ok(self * o)
    }

    pub fn evaluate(&self, point: &[C]) -> Result<C, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength { expected: self.nvars, got: point.len() });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[C]) -> C {
        let mut powers: Vec<Vec<C>> = (0..self.nvars).map(|i| vec![C::one(), point[i].clone()]).collect();
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let row = &mut powers[i];
                while row.len() <= k as usize {
                    let next = row[row.len() - 1].clone() * point[i].clone();
                    row.push(next);
                }
                t = t * row[k as usize].clone();
            }
            acc = acc + t;
        }
        acc
    }

    /// Composition `self ∘ map`, where `map[i]` replaces `x_{i+1}`.
    pub fn substitute(&self, map: &[Poly<C>]) -> Result<Self, PolyError> {
        if map.len() != self.nvars {
            return Err(PolyError::Arity { expected: self.nvars, got: map.len() });
        }
        let target = map.first().map_or(0, |p| p.nvars);
        for p in map {
            if p.nvars != target {
                return Err(PolyError::NvarsMismatch { left: target, right: p.nvars });
            }
        }
        let mut cache: HashMap<(usize, u32), Poly<C>> = HashMap::new();
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let pw = cache.entry((i, k)).or_insert_with(|| map[i].pow(k));
                t = &t * pw;
            }
            out = &out + &t;
        }
        Ok(out)
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn to_approx(&self) -> Poly<num_complex::Complex64> {
        self.map_coeffs(|c| c.to_complex())
    }

    /// Embeds into a ring with `nvars` ≥ current variables (new ones appended).
    pub fn extend_vars(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars);
        Poly {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut v = e.0.clone();
                    v.resize(nvars, 0);
                    (Exponent(v), c.clone())
                })
                .collect(),
        }
    }
}

impl<'a, C: Scalar> Add<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn add(self, o: &'a Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, o.nvars, "nvars mismatch");
        let (big, small) = if self.terms.len() >= o.terms.len() { (self, o) } else { (o, self) };
        let mut out = big.clone();
        for (e, c) in &small.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a, C: Scalar> Sub<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn sub(self, o: &'a Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, o.nvars, "nvars mismatch");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a, C: Scalar> Mul<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn mul(self, o: &'a Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, o.nvars, "nvars mismatch");
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                out.add_term(ea.add(eb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Scalar> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

impl<C: Scalar> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative_like();
            let c = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let constant = e.degree() == 0;
            if constant {
                if !c.is_compound() {
                    write!(f, "{c}")?;
                } else {
                    write!(f, "({c})")?;
                }
            } else if c.is_one() {
                write!(f, "{e}")?;
            } else if c.is_atomic() {
                write!(f, "{c}*{e}")?;
            } else {
                write!(f, "({c})*{e}")?;
            }
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.nvars, self)
    }
}

impl serde::Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for Poly<GaussRat> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All monomials of total degree ≤ `degree`, ascending graded-lex.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    monomials: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: u32) -> Self {
        let mut monomials = Vec::with_capacity(binomial(nvars + degree as usize, degree as usize));
        let mut cur = vec![0u32; nvars];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Exponent>) {
            if i == cur.len() {
                out.push(Exponent(cur.clone()));
                return;
            }
            for k in 0..=left {
                cur[i] = k;
                rec(i + 1, left - k, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, degree, &mut cur, &mut monomials);
        monomials.sort();
        let index = monomials.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        MonomialBasis { nvars, degree, monomials, index }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Coordinate vector; `None` if `p` has a term outside the basis.
    pub fn coordinates<C: Scalar>(&self, p: &Poly<C>) -> Option<Vec<C>> {
        let mut v = vec![C::zero(); self.len()];
        for (e, c) in p.terms() {
            v[self.index_of(e)?] = c.clone();
        }
        Some(v)
    }

    pub fn poly<C: Scalar>(&self, coords: &[C]) -> Poly<C> {
        Poly::from_terms(
            self.nvars,
            self.monomials.iter().cloned().zip(coords.iter().cloned()),
        )
    }
}

/// Parses the polynomial grammar into an exact polynomial in `nvars` variables.
///
/// Variables are `x1..x<nvars>`; literals are integers, `p/q`, and a trailing
/// `i` marks an imaginary literal (`2i`, `1/2i`, `i`).
pub fn parse(text: &str, nvars: usize) -> Result<ExactPoly, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, nvars };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ExactPoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ExactPoly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ExactPoly, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                return Ok(-&self.factor()?);
            }
            Some(b'+') => {
                self.pos += 1;
                return self.factor();
            }
            _ => {}
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.uint()?;
            let k = u32::try_from(k).map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<BigInt, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn base(&mut self) -> Result<ExactPoly, ParseError> {
        let n = self.nvars;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Poly::constant(n, GaussRat::i()))
            }
            Some(b'x') => {
                let at = self.pos;
                self.pos += 1;
                let k = self.uint()?;
                let idx: usize = k.try_into().map_err(|_| ParseError { pos: at, msg: "variable index too large".into() })?;
                if idx == 0 || idx > n {
                    return Err(ParseError {
                        pos: at,
                        msg: format!("variable x{idx} out of range (nvars = {n})"),
                    });
                }
                Ok(Poly::var(n, idx - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let mut q = BigRational::from_integer(num);
                if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    let den = self.uint()?;
                    if den.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    q /= BigRational::from_integer(den);
                }
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    return Ok(Poly::constant(n, GaussRat::new(BigRational::zero(), q)));
                }
                Ok(Poly::constant(n, GaussRat::real(q)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn p(s: &str, n: usize) -> ExactPoly {
        parse(s, n).unwrap()
    }

    #[test]
    fn parse_examples() {
        let a = p("x1^2*x2 - (1/2)*x3", 3);
        assert_eq!(a.nterms(), 2);
        assert_eq!(a.degree(), 3);
        let z = p("0", 2);
        assert!(z.is_zero());
        assert_eq!(z.degree(), -1);
        let c = p("(3+2i)*x2", 2);
        assert_eq!(c.nterms(), 1);
        let (e, k) = c.leading_term().unwrap();
        assert_eq!(e, &Exponent::unit(2, 1));
        assert_eq!(k.to_string(), "3+2i");
    }

    #[test]
    fn parse_errors() {
        let e = parse("x1 + x4", 3).unwrap_err();
        assert_eq!(e.pos, 5);
        assert!(parse("x1 +", 2).is_err());
        assert!(parse("x1 ) ", 2).is_err());
        assert!(parse("1/0", 1).is_err());
        assert!(parse("x0", 1).is_err());
        assert!(parse("2 x1", 1).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("x1^2*x2", 2).partial_derivative(0), p("2*x1*x2", 2));
        assert!(p("x2^3", 2).partial_derivative(0).is_zero());
        assert!(p("x1", 1).checked_partial_derivative(1).is_err());
    }

    #[test]
    fn difference_of_squares() {
        let a = p("x1+x2", 2);
        let b = p("x1-x2", 2);
        assert_eq!(&a * &b, p("x1^2 - x2^2", 2));
    }

    #[test]
    fn nvars_mismatch_is_an_error() {
        assert!(matches!(
            p("x1", 1).checked_add(&p("x1", 2)),
            Err(PolyError::NvarsMismatch { .. })
        ));
        assert!(p("x1", 1).checked_mul(&p("x2", 2)).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let f = p("x1^2*x2", 2);
        assert_eq!(f.evaluate(&[GaussRat::int(2), GaussRat::int(3)]).unwrap(), GaussRat::int(12));
        let g = p("3*x1 + 7 - x2", 2);
        assert_eq!(g.evaluate(&[GaussRat::zero(), GaussRat::zero()]).unwrap(), GaussRat::int(7));
        let h = p("x1*x2 - 1", 2);
        assert!(h.evaluate(&[GaussRat::int(2), GaussRat::ratio(1, 2)]).unwrap().is_zero());
        assert!(matches!(f.evaluate(&[GaussRat::one()]), Err(PolyError::PointLength { .. })));
    }

    #[test]
    fn substitution_examples() {
        let sq = p("x1^2", 2);
        let map = vec![p("x1 + x2", 2), p("x2", 2)];
        assert_eq!(sq.substitute(&map).unwrap(), p("x1^2 + 2*x1*x2 + x2^2", 2));
        let f = p("x1^3*x2 - (1/3+i)*x2^2 + 5", 2);
        let id = vec![Poly::var(2, 0), Poly::var(2, 1)];
        assert_eq!(f.substitute(&id).unwrap(), f);
        let shear = vec![p("x1", 2), p("x2 + x1^2", 2)];
        assert_eq!(p("x2", 2).substitute(&shear).unwrap(), p("x2 + x1^2", 2));
        assert!(matches!(sq.substitute(&map[..1]), Err(PolyError::Arity { .. })));
    }

    #[test]
    fn canonical_strings_round_trip() {
        let corpus = [
            ("0", 2),
            ("1", 1),
            ("-7", 1),
            ("x1", 1),
            ("-x2", 2),
            ("x1^2*x2 - (1/2)*x3", 3),
            ("3*x1^2*x2 - (1/2+2i)*x3", 3),
            ("2i*x1 - i*x2 + 1/3", 2),
            ("x1^3 - x1*x2^2 + (5/7-3i)*x2 + (1+i)", 2),
            ("x2^4 - (2/3)*x1*x2*x3 - 4", 3),
            ("i", 1),
            ("x1 - 1/2", 1),
        ];
        for (s, n) in corpus {
            assert_eq!(p(s, n).to_string(), s, "round trip of {s}");
        }
    }

    #[test]
    fn grlex_order() {
        let a = Exponent::new(vec![1, 0]);
        let b = Exponent::new(vec![0, 1]);
        let c = Exponent::new(vec![0, 2]);
        assert!(a > b);
        assert!(c > a);
        let basis = MonomialBasis::new(2, 2);
        assert_eq!(basis.len(), 6);
        assert_eq!(basis.monomials()[0], Exponent::zero(2));
        assert_eq!(basis.monomials()[5], Exponent::new(vec![2, 0]));
    }

    #[test]
    fn monomial_basis_size_is_binomial() {
        for n in 1..4 {
            for d in 0..6 {
                assert_eq!(MonomialBasis::new(n, d).len(), binomial(n + d as usize, d as usize));
            }
        }
    }
}
