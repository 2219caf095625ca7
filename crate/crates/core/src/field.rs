//! Polynomial vector fields viewed as derivations of the coordinate ring.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::poly::{parse, Exponent, ExactPoly, MonomialBasis, ParseError, Poly, PolyError};
use crate::scalar::{GaussRat, Scalar};

/// Iteration cap used when deciding nilpotency.
pub const DEFAULT_NILPOTENCY_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("component {component}: {source}")]
    Parse { component: usize, offset: usize, source: ParseError },
    #[error("vector field text must look like `[p1; p2; ...]`")]
    Brackets,
    #[error("vector field is not locally nilpotent within {cap} iterations")]
    NotNilpotent { cap: usize },
    #[error("scaling parameter must be nonzero")]
    ZeroLambda,
    #[error("weights have length {got}, expected {expected}")]
    WeightCount { expected: usize, got: usize },
    #[error("map has no stored inverse")]
    MissingInverse,
}

/// `Σ component[i] · ∂/∂x_{i+1}`.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField<C> {
    components: Vec<Poly<C>>,
}

pub type ExactField = VectorField<GaussRat>;

impl<C: Scalar> VectorField<C> {
    pub fn new(components: Vec<Poly<C>>) -> Result<Self, FieldError> {
        let n = components.len();
        for p in &components {
            if p.nvars() != n {
                return Err(PolyError::NvarsMismatch { left: n, right: p.nvars() }.into());
            }
        }
        Ok(VectorField { components })
    }

    pub fn zero(nvars: usize) -> Self {
        VectorField { components: vec![Poly::zero(nvars); nvars] }
    }

    /// `∂/∂x_{i+1}`.
    pub fn coordinate(nvars: usize, i: usize) -> Self {
        Self::along(nvars, i, Poly::one(nvars))
    }

    /// `f · ∂/∂x_{i+1}`.
    pub fn along(nvars: usize, i: usize, f: Poly<C>) -> Self {
        assert_eq!(f.nvars(), nvars);
        let mut v = Self::zero(nvars);
        v.components[i] = f;
        v
    }

    /// Constant field with the given direction vector.
    pub fn constant(direction: &[C]) -> Self {
        let n = direction.len();
        VectorField { components: direction.iter().map(|c| Poly::constant(n, c.clone())).collect() }
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly<C>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly<C> {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    /// Largest component degree, `-1` for the zero field.
    pub fn coefficient_degree(&self) -> i64 {
        self.components.iter().map(Poly::degree).max().unwrap_or(-1)
    }

    fn check(&self, o: &Self) -> Result<(), FieldError> {
        if self.nvars() != o.nvars() {
            return Err(PolyError::NvarsMismatch { left: self.nvars(), right: o.nvars() }.into());
        }
        Ok(())
    }

    /// Derivation applied to a function: `Σ V_i ∂_i f`.
    pub fn apply(&self, f: &Poly<C>) -> Poly<C> {
        assert_eq!(f.nvars(), self.nvars(), "nvars mismatch");
        let mut out = Poly::zero(self.nvars());
        for (i, vi) in self.components.iter().enumerate() {
            if vi.is_zero() || !f.depends_on(i) {
                continue;
            }
            out = &out + &(vi * &f.partial_derivative(i));
        }
        out
    }

    pub fn checked_apply(&self, f: &Poly<C>) -> Result<Poly<C>, FieldError> {
        if f.nvars() != self.nvars() {
            return Err(PolyError::NvarsMismatch { left: self.nvars(), right: f.nvars() }.into());
        }
        Ok(self.apply(f))
    }

    /// `[V, W]_k = V(W_k) − W(V_k)`.
    pub fn lie_bracket(&self, w: &Self) -> Self {
        assert_eq!(self.nvars(), w.nvars(), "nvars mismatch");
        VectorField {
            components: (0..self.nvars())
                .map(|k| &self.apply(&w.components[k]) - &w.apply(&self.components[k]))
                .collect(),
        }
    }

    pub fn checked_lie_bracket(&self, w: &Self) -> Result<Self, FieldError> {
        self.check(w)?;
        Ok(self.lie_bracket(w))
    }

    pub fn add(&self, o: &Self) -> Self {
        VectorField {
            components: self.components.iter().zip(&o.components).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        VectorField {
            components: self.components.iter().zip(&o.components).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        VectorField { components: self.components.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        VectorField { components: self.components.iter().map(|a| a.scale(c)).collect() }
    }

    /// The field `f · V`.
    pub fn mul_poly(&self, f: &Poly<C>) -> Self {
        VectorField { components: self.components.iter().map(|a| f * a).collect() }
    }

    pub fn evaluate(&self, point: &[C]) -> Result<Vec<C>, PolyError> {
        self.components.iter().map(|p| p.evaluate(point)).collect()
    }

    pub fn to_approx(&self) -> VectorField<num_complex::Complex64> {
        VectorField { components: self.components.iter().map(Poly::to_approx).collect() }
    }

    /// `V^0 f, V^1 f, …` up to (excluding) the first zero, or `None` if no
    /// zero appears within `cap` applications.
    pub fn iterates(&self, f: &Poly<C>, cap: usize) -> Option<Vec<Poly<C>>> {
        let mut out = Vec::new();
        let mut cur = f.clone();
        for _ in 0..=cap {
            if cur.is_zero() {
                return Some(out);
            }
            let next = self.apply(&cur);
            out.push(cur);
            cur = next;
        }
        None
    }

    /// `Some(weights)` when the field is `Σ wᵢ xᵢ ∂ᵢ` with integer weights.
    pub fn diagonal_weights(&self) -> Option<Vec<i64>> {
        let n = self.nvars();
        let mut w = Vec::with_capacity(n);
        for (i, p) in self.components.iter().enumerate() {
            if p.is_zero() {
                w.push(0);
                continue;
            }
            if p.nterms() != 1 {
                return None;
            }
            let (e, c) = p.leading_term()?;
            if e != &Exponent::unit(n, i) {
                return None;
            }
            w.push(c.as_integer()?);
        }
        Some(w)
    }
}

/// Parses `[p1; p2; ...; pn]`; the number of components fixes the ambient
/// dimension.
pub fn parse_field(text: &str) -> Result<ExactField, FieldError> {
    let t = text.trim();
    let inner = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or(FieldError::Brackets)?;
    let base = text.len() - text.trim_start().len() + 1;
    let parts: Vec<&str> = inner.split(';').collect();
    let n = parts.len();
    let mut comps = Vec::with_capacity(n);
    let mut offset = base;
    for (k, part) in parts.iter().enumerate() {
        let p = parse(part, n).map_err(|e| FieldError::Parse {
            component: k + 1,
            offset: offset + e.pos,
            source: e,
        })?;
        comps.push(p);
        offset += part.len() + 1;
    }
    VectorField::new(comps)
}

impl<C: Scalar> fmt::Display for VectorField<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

impl<C: Scalar> fmt::Debug for VectorField<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ExactField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_field(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NilpotencyVerdict {
    /// `orders[i]` is the smallest `k` with `V^k(xᵢ) = 0`.
    Nilpotent { orders: Vec<usize> },
    NotNilpotentWithinCap,
    /// Cap reached on a non-coordinate query; nothing is concluded.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NilpotencyReport {
    pub verdict: NilpotencyVerdict,
    pub cap: usize,
}

impl NilpotencyReport {
    pub fn is_nilpotent(&self) -> bool {
        matches!(self.verdict, NilpotencyVerdict::Nilpotent { .. })
    }
}

/// Decides local nilpotency on the coordinate functions.
///
/// `V^k(xᵢ) = 0` for every coordinate implies local nilpotency on the whole
/// polynomial ring, since a derivation nilpotent on generators is nilpotent
/// on products of them (Leibniz).
pub fn nilpotency_report<C: Scalar>(v: &VectorField<C>, cap: usize) -> NilpotencyReport {
    let cap = cap.max(1);
    let n = v.nvars();
    let mut orders = Vec::with_capacity(n);
    for i in 0..n {
        match v.iterates(&Poly::var(n, i), cap) {
            Some(it) => orders.push(it.len()),
            None => return NilpotencyReport { verdict: NilpotencyVerdict::NotNilpotentWithinCap, cap },
        }
    }
    NilpotencyReport { verdict: NilpotencyVerdict::Nilpotent { orders }, cap }
}

/// Nilpotency order of `V` on a single function. Hitting the cap is reported
/// as `Indeterminate` rather than a negative answer.
pub fn nilpotency_on<C: Scalar>(v: &VectorField<C>, f: &Poly<C>, cap: usize) -> NilpotencyVerdict {
    match v.iterates(f, cap.max(1)) {
        Some(it) => NilpotencyVerdict::Nilpotent { orders: vec![it.len()] },
        None => NilpotencyVerdict::Indeterminate,
    }
}

/// Basis of `{f : deg f ≤ d, V(f) = 0}`.
///
/// Elements are returned in ascending order of leading monomial; each has
/// leading coefficient 1 and no element contains another's leading monomial.
pub fn kernel_basis(v: &ExactField, d: u32) -> Vec<ExactPoly> {
    let n = v.nvars();
    let domain = MonomialBasis::new(n, d);
    let images: Vec<ExactPoly> = domain
        .monomials()
        .iter()
        .map(|e| v.apply(&Poly::monomial(n, e.clone(), GaussRat::from_i64(1))))
        .collect();
    let mut row_of: HashMap<Exponent, usize> = HashMap::new();
    for img in &images {
        for (e, _) in img.terms() {
            let k = row_of.len();
            row_of.entry(e.clone()).or_insert(k);
        }
    }
    let mut matrix = vec![vec![GaussRat::from_i64(0); domain.len()]; row_of.len()];
    for (col, img) in images.iter().enumerate() {
        for (e, c) in img.terms() {
            matrix[row_of[e]][col] = c.clone();
        }
    }
    linalg::nullspace(&matrix, domain.len())
        .into_iter()
        .map(|coords| domain.poly(&coords))
        .collect()
}

/// Polynomial self-map of affine space, optionally carrying its inverse.
#[derive(Clone, PartialEq)]
pub struct PolyMap<C> {
    components: Vec<Poly<C>>,
    inverse: Option<Vec<Poly<C>>>,
}

pub type ExactMap = PolyMap<GaussRat>;

impl<C: Scalar> PolyMap<C> {
    pub fn new(components: Vec<Poly<C>>) -> Result<Self, FieldError> {
        let n = components.len();
        for p in &components {
            if p.nvars() != n {
                return Err(PolyError::NvarsMismatch { left: n, right: p.nvars() }.into());
            }
        }
        Ok(PolyMap { components, inverse: None })
    }

    /// Attaches an inverse; fails unless both compositions are the identity.
    pub fn with_inverse(mut self, inverse: Vec<Poly<C>>) -> Result<Self, FieldError> {
        if inverse.len() != self.components.len() {
            return Err(PolyError::Arity { expected: self.components.len(), got: inverse.len() }.into());
        }
        let inv = PolyMap { components: inverse, inverse: None };
        let id = Self::identity(self.nvars());
        if self.compose(&inv)?.components != id.components || inv.compose(&self)?.components != id.components {
            return Err(FieldError::MissingInverse);
        }
        self.inverse = Some(inv.components);
        Ok(self)
    }

    pub fn identity(nvars: usize) -> Self {
        let comps: Vec<Poly<C>> = (0..nvars).map(|i| Poly::var(nvars, i)).collect();
        PolyMap { components: comps.clone(), inverse: Some(comps) }
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly<C>] {
        &self.components
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn inverse(&self) -> Option<PolyMap<C>> {
        self.inverse.as_ref().map(|inv| PolyMap {
            components: inv.clone(),
            inverse: Some(self.components.clone()),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.components.iter().enumerate().all(|(i, p)| *p == Poly::var(self.nvars(), i))
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self, FieldError> {
        let components = self
            .components
            .iter()
            .map(|p| p.substitute(&other.components))
            .collect::<Result<Vec<_>, _>>()?;
        let inverse = match (&self.inverse, &other.inverse) {
            (Some(a), Some(b)) => Some(
                b.iter().map(|p| p.substitute(a)).collect::<Result<Vec<_>, _>>()?,
            ),
            _ => None,
        };
        Ok(PolyMap { components, inverse })
    }

    pub fn apply(&self, point: &[C]) -> Result<Vec<C>, PolyError> {
        self.components.iter().map(|p| p.evaluate(point)).collect()
    }

    pub fn to_approx(&self) -> PolyMap<num_complex::Complex64> {
        PolyMap {
            components: self.components.iter().map(Poly::to_approx).collect(),
            inverse: self.inverse.as_ref().map(|v| v.iter().map(Poly::to_approx).collect()),
        }
    }
}

impl<C: Scalar> fmt::Display for PolyMap<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

impl<C: Scalar> fmt::Debug for PolyMap<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn exp_series<C: Scalar>(v: &VectorField<C>, t: &C, cap: usize) -> Result<Vec<Poly<C>>, FieldError> {
    let n = v.nvars();
    (0..n)
        .map(|i| {
            let it = v.iterates(&Poly::var(n, i), cap).ok_or(FieldError::NotNilpotent { cap })?;
            let mut acc = Poly::zero(n);
            let mut coef = C::one();
            for (k, term) in it.iter().enumerate() {
                if k > 0 {
                    coef = coef * t.clone() * C::from_i64(k as i64).inv().expect("nonzero");
                }
                acc = &acc + &term.scale(&coef);
            }
            Ok(acc)
        })
        .collect()
}

/// Time-`t` flow of a locally nilpotent field: `xᵢ ↦ Σ_k t^k/k! · V^k(xᵢ)`,
/// with the time-`(−t)` flow stored as inverse.
pub fn flow_nilpotent<C: Scalar>(v: &VectorField<C>, t: &C) -> Result<PolyMap<C>, FieldError> {
    let fwd = exp_series(v, t, DEFAULT_NILPOTENCY_CAP)?;
    let back = exp_series(v, &-t.clone(), DEFAULT_NILPOTENCY_CAP)?;
    Ok(PolyMap { components: fwd, inverse: Some(back) })
}

/// `xᵢ ↦ λ^{wᵢ} xᵢ`, the algebraic ℂ*-action of `Σ wᵢ xᵢ ∂ᵢ`.
pub fn flow_semisimple<C: Scalar>(weights: &[i64], lambda: &C) -> Result<PolyMap<C>, FieldError> {
    let inv = lambda.inv().ok_or(FieldError::ZeroLambda)?;
    let n = weights.len();
    let power = |w: i64, fwd: bool| {
        let base = if (w >= 0) == fwd { lambda.clone() } else { inv.clone() };
        base.pow(w.unsigned_abs() as u32)
    };
    let comps = weights.iter().enumerate().map(|(i, &w)| Poly::var(n, i).scale(&power(w, true))).collect();
    let back = weights.iter().enumerate().map(|(i, &w)| Poly::var(n, i).scale(&power(w, false))).collect();
    Ok(PolyMap { components: comps, inverse: Some(back) })
}

/// Field whose flow is `φ ∘ exp(tV) ∘ φ⁻¹`, i.e. `(Dφ · V) ∘ φ⁻¹`.
pub fn pushforward<C: Scalar>(v: &VectorField<C>, phi: &PolyMap<C>) -> Result<VectorField<C>, FieldError> {
    let inv = phi.inverse.as_ref().ok_or(FieldError::MissingInverse)?;
    if phi.nvars() != v.nvars() {
        return Err(PolyError::Arity { expected: v.nvars(), got: phi.nvars() }.into());
    }
    let comps = phi
        .components
        .iter()
        .map(|pk| v.apply(pk).substitute(inv))
        .collect::<Result<Vec<_>, _>>()?;
    VectorField::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse;

    fn p(s: &str, n: usize) -> ExactPoly {
        parse(s, n).unwrap()
    }

    fn vf(s: &str) -> ExactField {
        parse_field(s).unwrap()
    }

    fn q(n: i64) -> GaussRat {
        GaussRat::int(n)
    }

    #[test]
    fn bracket_examples() {
        // hand expansion: [x2∂1, x1∂2] has components (x2·0 − x1·1, x2·1 − 0)
        assert_eq!(vf("[x2; 0]").lie_bracket(&vf("[0; x1]")), vf("[-x1; x2]"));
        let v = vf("[x1*x2^2 - 3; x2 + (1/2)*x1^3]");
        assert!(v.lie_bracket(&v).is_zero());
        let lhs = vf("[x2^2; 0]").lie_bracket(&vf("[0; x1]")).sub(&vf("[x1*x2^2; 0]").lie_bracket(&vf("[0; 1]")));
        assert_eq!(lhs, vf("[0; x2^2]"));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(vf("[1; 0]").apply(&p("x1*x2", 2)), p("x2", 2));
        assert!(vf("[x1^2; x2 - 1]").apply(&p("7/3", 2)).is_zero());
        assert_eq!(vf("[x2; 0]").apply(&p("x1^2", 2)), p("2*x1*x2", 2));
        assert!(vf("[1; 0]").checked_apply(&p("x1", 3)).is_err());
    }

    #[test]
    fn parse_and_display_fields() {
        let v = vf("[x2^2 - (1/2)*x1; 0; 3i]");
        assert_eq!(v.nvars(), 3);
        assert_eq!(v.to_string(), "[x2^2 - (1/2)*x1; 0; 3i]");
        assert!(matches!(parse_field("x1; x2"), Err(FieldError::Brackets)));
        match parse_field("[x1; x3]") {
            Err(FieldError::Parse { component: 2, offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nilpotency_examples() {
        let r = nilpotency_report(&vf("[1; 0]"), 64);
        assert_eq!(r.verdict, NilpotencyVerdict::Nilpotent { orders: vec![2, 1] });
        let r = nilpotency_report(&vf("[x1; 0]"), 10);
        assert_eq!(r.verdict, NilpotencyVerdict::NotNilpotentWithinCap);
        let r = nilpotency_report(&vf("[x2^2; 0]"), 64);
        assert_eq!(r.verdict, NilpotencyVerdict::Nilpotent { orders: vec![2, 1] });
        // triangular field: x3 -> x2 -> x1 chain
        let r = nilpotency_report(&vf("[x2; x3; 1]"), 64);
        assert_eq!(r.verdict, NilpotencyVerdict::Nilpotent { orders: vec![4, 3, 2] });
        assert_eq!(nilpotency_on(&vf("[x1; 0]"), &p("x1", 2), 5), NilpotencyVerdict::Indeterminate);
        assert_eq!(
            nilpotency_on(&vf("[x2; 0]"), &p("x1^2", 2), 5),
            NilpotencyVerdict::Nilpotent { orders: vec![3] }
        );
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&vf("[1; 0]"), 2);
        assert_eq!(k, vec![p("1", 2), p("x2", 2), p("x2^2", 2)]);
        let k = kernel_basis(&vf("[x1; -x2]"), 2);
        assert_eq!(k, vec![p("1", 2), p("x1*x2", 2)]);
        for d in 0..6u32 {
            let k = kernel_basis(&vf("[1; 0; 0]"), d);
            assert_eq!(k.len(), crate::binomial(d as usize + 2, 2));
        }
        // non-monomial kernel: x2∂1 − x1∂2 (rotation) kills x1² + x2²
        let k = kernel_basis(&vf("[x2; -x1]"), 2);
        assert_eq!(k, vec![p("1", 2), p("x1^2 + x2^2", 2)]);
    }

    #[test]
    fn flow_examples() {
        let t = GaussRat::ratio(3, 2);
        let f = flow_nilpotent(&vf("[x2^2; 0]"), &t).unwrap();
        assert_eq!(f.components(), &[p("x1 + (3/2)*x2^2", 2), p("x2", 2)]);
        assert!(flow_nilpotent(&vf("[x2^2; 0]"), &q(0)).unwrap().is_identity());
        assert!(matches!(flow_nilpotent(&vf("[x1; 0]"), &q(1)), Err(FieldError::NotNilpotent { .. })));
        let v = vf("[x2^2 + x3; x3^2; 1]");
        let s = GaussRat::ratio(-2, 3);
        let u = GaussRat::ratio(5, 7) + GaussRat::i();
        let lhs = flow_nilpotent(&v, &s).unwrap().compose(&flow_nilpotent(&v, &u).unwrap()).unwrap();
        let rhs = flow_nilpotent(&v, &(s + u)).unwrap();
        assert_eq!(lhs.components(), rhs.components());
        let f = flow_nilpotent(&v, &GaussRat::ratio(1, 3)).unwrap();
        assert!(f.compose(&f.inverse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn semisimple_examples() {
        let f = flow_semisimple(&[1, -1], &q(2)).unwrap();
        assert_eq!(f.components(), &[p("2*x1", 2), p("(1/2)*x2", 2)]);
        assert!(flow_semisimple(&[3, -2], &q(1)).unwrap().is_identity());
        let a = flow_semisimple(&[2, -1], &q(3)).unwrap();
        let b = flow_semisimple(&[2, -1], &GaussRat::i()).unwrap();
        let ab = flow_semisimple(&[2, -1], &(q(3) * GaussRat::i())).unwrap();
        assert_eq!(a.compose(&b).unwrap().components(), ab.components());
        assert!(matches!(flow_semisimple(&[1], &q(0)), Err(FieldError::ZeroLambda)));
    }

    #[test]
    fn pushforward_examples() {
        let v = vf("[x2; x1^2]");
        assert_eq!(pushforward(&v, &PolyMap::identity(2)).unwrap(), v);
        let phi = flow_nilpotent(&vf("[x2^2; 0]"), &q(1)).unwrap();
        assert_eq!(pushforward(&vf("[1; 0]"), &phi).unwrap(), vf("[1; 0]"));
        let no_inv = PolyMap::new(vec![p("x1", 2), p("x2", 2)]).unwrap();
        assert!(matches!(pushforward(&v, &no_inv), Err(FieldError::MissingInverse)));
    }

    #[test]
    fn diagonal_detection() {
        assert_eq!(vf("[x1; -3*x2]").diagonal_weights(), Some(vec![1, -3]));
        assert_eq!(vf("[0; x2]").diagonal_weights(), Some(vec![0, 1]));
        assert_eq!(vf("[x2; 0]").diagonal_weights(), None);
        assert_eq!(vf("[(1/2)*x1; 0]").diagonal_weights(), None);
    }
}
