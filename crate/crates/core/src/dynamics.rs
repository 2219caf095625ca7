//! Exact flows of complete fields, their compositions, and the numerical
//! experiments built on them: splitting convergence, group commutators and
//! basins of attraction.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{flow_nilpotent, flow_semisimple, nilpotency_report, parse_field, ExactField, ExactMap, FieldError, PolyMap, VectorField, DEFAULT_NILPOTENCY_CAP};
use crate::poly::{parse, Exponent, ExactPoly, ParseError, Poly};
use crate::scalar::{GaussRat, Scalar};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("need at least two variables")]
    TooFewVariables,
    #[error("field is not exactly integrable by a shear, overshear or nilpotent flow: {0}")]
    NotIntegrable(String),
    #[error("time must be finite and non-negative")]
    BadTime,
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("bracket identity failed for {0}")]
    IdentityFailed(String),
    #[error("the given point is not fixed: |F(p) - p| = {0:e}")]
    NotFixed(f64),
    #[error("ODE oracle did not converge")]
    OracleDiverged,
    #[error("need at least three parameter values for a slope fit")]
    TooFewSamples,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Flow time: exact when the composed map should stay exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Time {
    Exact(GaussRat),
    Approx(Complex64),
}

impl Time {
    pub fn real(t: f64) -> Self {
        Time::Approx(Complex64::new(t, 0.0))
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Time::Exact(q) => q.to_complex(),
            Time::Approx(z) => *z,
        }
    }

    fn neg(&self) -> Self {
        match self {
            Time::Exact(q) => Time::Exact(-q.clone()),
            Time::Approx(z) => Time::Approx(-z),
        }
    }

    fn inv(&self) -> Option<Self> {
        match self {
            Time::Exact(q) => q.inv().map(Time::Exact),
            Time::Approx(z) => Scalar::inv(z).map(Time::Approx),
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Exact(q) => write!(f, "{q}"),
            Time::Approx(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Time::Approx(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// Flat floating-point form of a polynomial for repeated evaluation.
#[derive(Debug, Clone)]
struct Compiled {
    terms: Vec<(Complex64, Vec<(usize, i32)>)>,
}

impl Compiled {
    fn new<C: Scalar>(p: &Poly<C>) -> Self {
        let terms = p
            .terms()
            .map(|(e, c)| {
                let vars = e.as_slice().iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32)).collect();
                (c.to_complex(), vars)
            })
            .collect();
        Compiled { terms }
    }

    fn eval(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::zero();
        for (c, vars) in &self.terms {
            let mut t = *c;
            for &(i, k) in vars {
                t *= x[i].powi(k);
            }
            acc += t;
        }
        acc
    }
}

/// A polynomial together with its compiled floating form.
#[derive(Debug)]
pub struct Coefficient {
    pub poly: ExactPoly,
    compiled: Compiled,
}

impl Coefficient {
    fn new(poly: ExactPoly) -> Arc<Self> {
        let compiled = Compiled::new(&poly);
        Arc::new(Coefficient { poly, compiled })
    }
}

/// A locally nilpotent field with the iterates `V^k(xᵢ)` precomputed.
#[derive(Debug)]
pub struct NilpotentFlow {
    pub field: ExactField,
    iterates: Vec<Vec<Compiled>>,
}

impl NilpotentFlow {
    fn new(field: ExactField) -> Result<Arc<Self>, DynamicsError> {
        let n = field.nvars();
        let iterates = (0..n)
            .map(|i| {
                field
                    .iterates(&Poly::var(n, i), DEFAULT_NILPOTENCY_CAP)
                    .map(|v| v.iter().map(Compiled::new).collect())
                    .ok_or_else(|| DynamicsError::NotIntegrable(field.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Arc::new(NilpotentFlow { field, iterates }))
    }
}

/// One exactly integrable automorphism.
#[derive(Debug, Clone)]
pub enum Elementary {
    /// `x_dir ↦ x_dir + t·coeff(x)`, with `coeff` free of `x_dir`.
    Shear { dir: usize, coeff: Arc<Coefficient>, time: Time },
    /// `x_dir ↦ x_dir · exp(t·rate(x))`, with `rate` free of `x_dir`.
    Overshear { dir: usize, rate: Arc<Coefficient>, time: Time },
    /// Time-`t` flow of a locally nilpotent field.
    Flow { flow: Arc<NilpotentFlow>, time: Time },
    /// `xₖ ↦ λ^{wₖ} xₖ`.
    Scaling { weights: Vec<i64>, lambda: Time },
}

impl Elementary {
    pub fn inverse(&self) -> Elementary {
        match self {
            Elementary::Shear { dir, coeff, time } => Elementary::Shear { dir: *dir, coeff: coeff.clone(), time: time.neg() },
            Elementary::Overshear { dir, rate, time } => {
                Elementary::Overshear { dir: *dir, rate: rate.clone(), time: time.neg() }
            }
            Elementary::Flow { flow, time } => Elementary::Flow { flow: flow.clone(), time: time.neg() },
            Elementary::Scaling { weights, lambda } => Elementary::Scaling {
                weights: weights.clone(),
                lambda: lambda.inv().expect("scaling parameter is nonzero"),
            },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Elementary::Shear { .. } => "shear",
            Elementary::Overshear { .. } => "overshear",
            Elementary::Flow { .. } => "flow",
            Elementary::Scaling { .. } => "scaling",
        }
    }

    fn apply(&self, x: &mut [Complex64]) {
        match self {
            Elementary::Shear { dir, coeff, time } => {
                let v = coeff.compiled.eval(x);
                x[*dir] += time.to_complex() * v;
            }
            Elementary::Overshear { dir, rate, time } => {
                let v = rate.compiled.eval(x);
                x[*dir] *= (time.to_complex() * v).exp();
            }
            Elementary::Flow { flow, time } => {
                let t = time.to_complex();
                let out: Vec<Complex64> = flow
                    .iterates
                    .iter()
                    .map(|its| {
                        let mut acc = Complex64::zero();
                        let mut coef = Complex64::one();
                        for (k, p) in its.iter().enumerate() {
                            if k > 0 {
                                coef *= t / k as f64;
                            }
                            acc += coef * p.eval(x);
                        }
                        acc
                    })
                    .collect();
                x.copy_from_slice(&out);
            }
            Elementary::Scaling { weights, lambda } => {
                let l = lambda.to_complex();
                for (xi, &w) in x.iter_mut().zip(weights) {
                    *xi *= l.powi(w as i32);
                }
            }
        }
    }

    /// The map as an exact polynomial automorphism, when all data are exact.
    pub fn exact_map(&self, n: usize) -> Option<ExactMap> {
        match self {
            Elementary::Shear { dir, coeff, time: Time::Exact(t) } => {
                let field = VectorField::along(n, *dir, coeff.poly.clone());
                flow_nilpotent(&field, t).ok()
            }
            Elementary::Flow { flow, time: Time::Exact(t) } => flow_nilpotent(&flow.field, t).ok(),
            Elementary::Scaling { weights, lambda: Time::Exact(l) } => flow_semisimple(weights, l).ok(),
            _ => None,
        }
    }
}

/// An exactly integrable field, before a time is attached.
#[derive(Debug, Clone)]
pub enum Generator {
    Shear { dir: usize, coeff: Arc<Coefficient> },
    Overshear { dir: usize, rate: Arc<Coefficient> },
    Flow(Arc<NilpotentFlow>),
}

impl Generator {
    /// Recognizes `f∂ᵢ` with `∂ᵢf = 0`, `xᵢf∂ᵢ` with `∂ᵢf = 0`, and other
    /// locally nilpotent fields.
    pub fn from_field(v: &ExactField) -> Result<Self, DynamicsError> {
        let n = v.nvars();
        let nonzero: Vec<usize> = (0..n).filter(|&i| !v.component(i).is_zero()).collect();
        if nonzero.is_empty() {
            return Ok(Generator::Shear { dir: 0, coeff: Coefficient::new(Poly::zero(n)) });
        }
        if let [i] = nonzero[..] {
            let f = v.component(i);
            if !f.depends_on(i) {
                return Ok(Generator::Shear { dir: i, coeff: Coefficient::new(f.clone()) });
            }
            if f.terms().all(|(e, _)| e.get(i) == 1) {
                let unit = Exponent::unit(n, i);
                let rate = Poly::from_terms(n, f.terms().map(|(e, c)| (e.checked_div(&unit).expect("divisible"), c.clone())));
                return Ok(Generator::Overshear { dir: i, rate: Coefficient::new(rate) });
            }
        }
        if nilpotency_report(v, DEFAULT_NILPOTENCY_CAP).is_nilpotent() {
            return Ok(Generator::Flow(NilpotentFlow::new(v.clone())?));
        }
        Err(DynamicsError::NotIntegrable(v.to_string()))
    }

    pub fn field(&self, n: usize) -> ExactField {
        match self {
            Generator::Shear { dir, coeff } => VectorField::along(n, *dir, coeff.poly.clone()),
            Generator::Overshear { dir, rate } => VectorField::along(n, *dir, &rate.poly * &Poly::var(n, *dir)),
            Generator::Flow(f) => f.field.clone(),
        }
    }

    pub fn at(&self, time: Time) -> Elementary {
        match self {
            Generator::Shear { dir, coeff } => Elementary::Shear { dir: *dir, coeff: coeff.clone(), time },
            Generator::Overshear { dir, rate } => Elementary::Overshear { dir: *dir, rate: rate.clone(), time },
            Generator::Flow(flow) => Elementary::Flow { flow: flow.clone(), time },
        }
    }
}

/// Composition `φ₁ ∘ φ₂ ∘ … ∘ φₖ` of elementary automorphisms; `φₖ` acts first.
#[derive(Debug, Clone)]
pub struct AutoSeq {
    nvars: usize,
    /// Application order: `applied[0]` acts first.
    applied: Vec<Elementary>,
}

impl AutoSeq {
    pub fn identity(nvars: usize) -> Self {
        AutoSeq { nvars, applied: Vec::new() }
    }

    /// Builds `factors[0] ∘ factors[1] ∘ …`.
    pub fn from_factors(nvars: usize, mut factors: Vec<Elementary>) -> Self {
        factors.reverse();
        AutoSeq { nvars, applied: factors }
    }

    fn from_applied(nvars: usize, applied: Vec<Elementary>) -> Self {
        AutoSeq { nvars, applied }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.applied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.applied.is_empty()
    }

    /// Factors in composition order (the last one acts first).
    pub fn factors(&self) -> impl Iterator<Item = &Elementary> {
        self.applied.iter().rev()
    }

    /// `next ∘ self`.
    pub fn then(mut self, next: &AutoSeq) -> Self {
        self.applied.extend(next.applied.iter().cloned());
        self
    }

    pub fn inverse(&self) -> Self {
        AutoSeq { nvars: self.nvars, applied: self.applied.iter().rev().map(Elementary::inverse).collect() }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        self.apply_in_place(&mut y);
        y
    }

    pub fn apply_in_place(&self, x: &mut [Complex64]) {
        for e in &self.applied {
            e.apply(x);
        }
    }

    /// The composite as an exact polynomial map, if every factor is exact.
    pub fn exact_map(&self) -> Option<ExactMap> {
        let mut acc = PolyMap::identity(self.nvars);
        for e in &self.applied {
            acc = e.exact_map(self.nvars)?.compose(&acc).ok()?;
        }
        Some(acc)
    }

    pub fn summary(&self) -> SeqSummary {
        let count = |k: &str| self.applied.iter().filter(|e| e.kind_name() == k).count();
        SeqSummary {
            nvars: self.nvars,
            factors: self.len(),
            shears: count("shear"),
            overshears: count("overshear"),
            flows: count("flow"),
            scalings: count("scaling"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeqSummary {
    pub nvars: usize,
    pub factors: usize,
    pub shears: usize,
    pub overshears: usize,
    pub flows: usize,
    pub scalings: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TimeSpec {
    Exact(String),
    Approx(Complex64),
}

impl From<&Time> for TimeSpec {
    fn from(t: &Time) -> Self {
        match t {
            Time::Exact(q) => TimeSpec::Exact(q.to_string()),
            Time::Approx(z) => TimeSpec::Approx(*z),
        }
    }
}

impl TryFrom<TimeSpec> for Time {
    type Error = DynamicsError;

    fn try_from(t: TimeSpec) -> Result<Self, Self::Error> {
        Ok(match t {
            TimeSpec::Exact(s) => Time::Exact(s.parse()?),
            TimeSpec::Approx(z) => Time::Approx(z),
        })
    }
}

/// File form of one factor; `direction` is one-based like `x1, x2, …`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ElementarySpec {
    Shear { direction: usize, coeff: String, time: TimeSpec },
    Overshear { direction: usize, rate: String, time: TimeSpec },
    Flow { field: String, time: TimeSpec },
    Scaling { weights: Vec<i64>, lambda: TimeSpec },
}

/// File form of an [`AutoSeq`]: factors in composition order.
#[derive(Serialize, Deserialize)]
pub struct AutoSeqSpec {
    nvars: usize,
    factors: Vec<ElementarySpec>,
}

impl From<&AutoSeq> for AutoSeqSpec {
    fn from(s: &AutoSeq) -> Self {
        let factors = s
            .factors()
            .map(|e| match e {
                Elementary::Shear { dir, coeff, time } => {
                    ElementarySpec::Shear { direction: dir + 1, coeff: coeff.poly.to_string(), time: time.into() }
                }
                Elementary::Overshear { dir, rate, time } => {
                    ElementarySpec::Overshear { direction: dir + 1, rate: rate.poly.to_string(), time: time.into() }
                }
                Elementary::Flow { flow, time } => ElementarySpec::Flow { field: flow.field.to_string(), time: time.into() },
                Elementary::Scaling { weights, lambda } => {
                    ElementarySpec::Scaling { weights: weights.clone(), lambda: lambda.into() }
                }
            })
            .collect();
        AutoSeqSpec { nvars: s.nvars, factors }
    }
}

impl TryFrom<AutoSeqSpec> for AutoSeq {
    type Error = DynamicsError;

    fn try_from(spec: AutoSeqSpec) -> Result<Self, Self::Error> {
        let n = spec.nvars;
        let check_dir = |d: usize| {
            if d == 0 || d > n {
                Err(DynamicsError::Dimension { expected: n, got: d })
            } else {
                Ok(d - 1)
            }
        };
        let mut factors = Vec::new();
        for f in spec.factors {
            let e = match f {
                ElementarySpec::Shear { direction, coeff, time } => {
                    let dir = check_dir(direction)?;
                    let p = parse(&coeff, n)?;
                    if p.depends_on(dir) {
                        return Err(DynamicsError::NotIntegrable(format!("shear coefficient {p} depends on x{direction}")));
                    }
                    Elementary::Shear { dir, coeff: Coefficient::new(p), time: time.try_into()? }
                }
                ElementarySpec::Overshear { direction, rate, time } => {
                    let dir = check_dir(direction)?;
                    let p = parse(&rate, n)?;
                    if p.depends_on(dir) {
                        return Err(DynamicsError::NotIntegrable(format!("overshear rate {p} depends on x{direction}")));
                    }
                    Elementary::Overshear { dir, rate: Coefficient::new(p), time: time.try_into()? }
                }
                ElementarySpec::Flow { field, time } => {
                    let v = parse_field(&field)?;
                    if v.nvars() != n {
                        return Err(DynamicsError::Dimension { expected: n, got: v.nvars() });
                    }
                    Elementary::Flow { flow: NilpotentFlow::new(v)?, time: time.try_into()? }
                }
                ElementarySpec::Scaling { weights, lambda } => {
                    if weights.len() != n {
                        return Err(DynamicsError::Dimension { expected: n, got: weights.len() });
                    }
                    let lambda: Time = lambda.try_into()?;
                    if lambda.inv().is_none() {
                        return Err(FieldError::ZeroLambda.into());
                    }
                    Elementary::Scaling { weights, lambda }
                }
            };
            factors.push(e);
        }
        Ok(AutoSeq::from_factors(n, factors))
    }
}

impl Serialize for AutoSeq {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AutoSeqSpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AutoSeq {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        AutoSeqSpec::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

/// Completely integrable building block of a field.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompletePrimitive {
    /// `coeff·∂_dir` with `coeff` free of `x_dir`.
    Shear { dir: usize, coeff: ExactPoly },
    /// `[f₁∂ⱼ, xⱼf₂∂ᵢ] − [xⱼf₁∂ⱼ, f₂∂ᵢ] = f₁f₂∂ᵢ`; factors are in that order.
    BracketPair { dir: usize, aux: usize, f1: ExactPoly, f2: ExactPoly, factors: [ExactField; 4] },
}

impl CompletePrimitive {
    /// Builds a bracket pair and re-verifies its identity exactly.
    pub fn bracket_pair(dir: usize, aux: usize, f1: ExactPoly, f2: ExactPoly) -> Result<Self, DynamicsError> {
        let n = f1.nvars();
        if f1.depends_on(aux) || f2.depends_on(dir) || dir == aux {
            return Err(DynamicsError::IdentityFailed(format!("f1 = {f1}, f2 = {f2}")));
        }
        let xj = Poly::var(n, aux);
        let factors = [
            VectorField::along(n, aux, f1.clone()),
            VectorField::along(n, dir, &xj * &f2),
            VectorField::along(n, aux, &xj * &f1),
            VectorField::along(n, dir, f2.clone()),
        ];
        let lhs = factors[0].lie_bracket(&factors[1]).sub(&factors[2].lie_bracket(&factors[3]));
        if lhs != VectorField::along(n, dir, &f1 * &f2) {
            return Err(DynamicsError::IdentityFailed(format!("f1 = {f1}, f2 = {f2}")));
        }
        Ok(CompletePrimitive::BracketPair { dir, aux, f1, f2, factors })
    }

    pub fn nvars(&self) -> usize {
        match self {
            CompletePrimitive::Shear { coeff, .. } => coeff.nvars(),
            CompletePrimitive::BracketPair { f1, .. } => f1.nvars(),
        }
    }

    /// The field this primitive realizes.
    pub fn target(&self) -> ExactField {
        let n = self.nvars();
        match self {
            CompletePrimitive::Shear { dir, coeff } => VectorField::along(n, *dir, coeff.clone()),
            CompletePrimitive::BracketPair { dir, f1, f2, .. } => VectorField::along(n, *dir, f1 * f2),
        }
    }

    fn realization(&self) -> Result<Vec<Piece>, DynamicsError> {
        Ok(match self {
            CompletePrimitive::Shear { .. } => vec![Piece::Exact(Generator::from_field(&self.target())?)],
            CompletePrimitive::BracketPair { factors, .. } => {
                let g: Vec<Generator> = factors.iter().map(Generator::from_field).collect::<Result<_, _>>()?;
                // [A₁, B₁] + [B₂, A₂]
                vec![Piece::Bracket(g[0].clone(), g[1].clone()), Piece::Bracket(g[3].clone(), g[2].clone())]
            }
        })
    }
}

impl fmt::Display for CompletePrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompletePrimitive::Shear { dir, coeff } => write!(f, "shear ({coeff})*d{}", dir + 1),
            CompletePrimitive::BracketPair { factors, .. } => write!(
                f,
                "bracket [{}, {}] - [{}, {}] = {}",
                factors[0],
                factors[1],
                factors[2],
                factors[3],
                self.target()
            ),
        }
    }
}

/// Splits `V` monomial by monomial into shears and bracket pairs whose
/// targets sum to `V` exactly.
pub fn decompose_field(v: &ExactField) -> Result<Vec<CompletePrimitive>, DynamicsError> {
    let n = v.nvars();
    if n < 2 {
        return Err(DynamicsError::TooFewVariables);
    }
    let mut out = Vec::new();
    for i in 0..n {
        for (e, c) in v.component(i).terms() {
            let mono = Poly::monomial(n, e.clone(), c.clone());
            if e.get(i) == 0 {
                out.push(CompletePrimitive::Shear { dir: i, coeff: mono });
                continue;
            }
            let j = if i == 0 { 1 } else { 0 };
            let aj = Exponent::new((0..n).map(|k| if k == j { e.get(j) } else { 0 }).collect());
            let f2 = Poly::monomial(n, aj.clone(), GaussRat::one());
            let f1 = Poly::monomial(n, e.checked_div(&aj).expect("divides"), c.clone());
            out.push(CompletePrimitive::bracket_pair(i, j, f1, f2)?);
        }
    }
    Ok(out)
}

/// Sum of the primitives' targets.
pub fn recompose(prims: &[CompletePrimitive], n: usize) -> ExactField {
    prims.iter().fold(VectorField::zero(n), |acc, p| acc.add(&p.target()))
}

#[derive(Debug, Clone)]
enum Piece {
    Exact(Generator),
    Bracket(Generator, Generator),
}

/// How a bracket flow is approximated from the flows of its two fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorScheme {
    /// `A(√s) B(√s) A(−√s) B(−√s)`, local error `O(s^{3/2})`.
    Plain,
    /// The plain commutator at `√(s/2)` followed by the one at `−√(s/2)`;
    /// the cubic terms cancel and the local error is `O(s²)`.
    #[default]
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    #[default]
    Lie,
    Strang,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StepOptions {
    pub splitting: Splitting,
    pub commutator: CommutatorScheme,
}

fn check_time(s: f64) -> Result<(), DynamicsError> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(DynamicsError::BadTime)
    }
}

fn commutator_factors(a: &Generator, b: &Generator, x: f64, out: &mut Vec<Elementary>) {
    out.push(a.at(Time::real(x)));
    out.push(b.at(Time::real(x)));
    out.push(a.at(Time::real(-x)));
    out.push(b.at(Time::real(-x)));
}

fn bracket_flow(a: &Generator, b: &Generator, s: f64, scheme: CommutatorScheme, out: &mut Vec<Elementary>) {
    if s == 0.0 {
        return;
    }
    match scheme {
        CommutatorScheme::Plain => commutator_factors(a, b, s.sqrt(), out),
        CommutatorScheme::Symmetric => {
            let x = (s / 2.0).sqrt();
            commutator_factors(a, b, x, out);
            commutator_factors(a, b, -x, out);
        }
    }
}

fn commutator_with(a: &ExactField, b: &ExactField, s: f64, scheme: CommutatorScheme) -> Result<AutoSeq, DynamicsError> {
    check_time(s)?;
    if a.nvars() != b.nvars() {
        return Err(DynamicsError::Dimension { expected: a.nvars(), got: b.nvars() });
    }
    let (ga, gb) = (Generator::from_field(a)?, Generator::from_field(b)?);
    let mut out = Vec::new();
    bracket_flow(&ga, &gb, s, scheme, &mut out);
    Ok(AutoSeq::from_applied(a.nvars(), out))
}

/// Group commutator approximating the time-`s` flow of `[A, B]`: the flows
/// of `A` and `B` for time `√s`, then of `A` and `B` for time `−√s`, in that
/// order of application.
pub fn commutator_step(a: &ExactField, b: &ExactField, s: f64) -> Result<AutoSeq, DynamicsError> {
    commutator_with(a, b, s, CommutatorScheme::Plain)
}

/// Second-order variant of [`commutator_step`].
pub fn symmetric_commutator_step(a: &ExactField, b: &ExactField, s: f64) -> Result<AutoSeq, DynamicsError> {
    commutator_with(a, b, s, CommutatorScheme::Symmetric)
}

fn piece_step(p: &Piece, h: f64, scheme: CommutatorScheme, out: &mut Vec<Elementary>) {
    match p {
        Piece::Exact(g) => out.push(g.at(Time::real(h))),
        Piece::Bracket(a, b) => bracket_flow(a, b, h, scheme, out),
    }
}

/// `m` splitting steps of length `T/m` through the primitives in list order.
pub fn trotter_compose(prims: &[CompletePrimitive], t: f64, m: usize, opts: StepOptions) -> Result<AutoSeq, DynamicsError> {
    check_time(t)?;
    if m == 0 {
        return Err(DynamicsError::ZeroSteps);
    }
    let n = prims.first().map_or(0, CompletePrimitive::nvars);
    let pieces: Vec<Piece> = prims.iter().map(|p| p.realization()).collect::<Result<Vec<_>, _>>()?.concat();
    let h = t / m as f64;
    let mut out = Vec::new();
    for _ in 0..m {
        match opts.splitting {
            Splitting::Lie => {
                for p in &pieces {
                    piece_step(p, h, opts.commutator, &mut out);
                }
            }
            Splitting::Strang => {
                if let Some((last, rest)) = pieces.split_last() {
                    for p in rest {
                        piece_step(p, h / 2.0, opts.commutator, &mut out);
                    }
                    piece_step(last, h, opts.commutator, &mut out);
                    for p in rest.iter().rev() {
                        piece_step(p, h / 2.0, opts.commutator, &mut out);
                    }
                }
            }
        }
    }
    Ok(AutoSeq::from_applied(n, out))
}

/// `V(t) = Σ tᵏ Vₖ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDependentField {
    pub terms: Vec<ExactField>,
}

impl TimeDependentField {
    pub fn autonomous(v: ExactField) -> Self {
        TimeDependentField { terms: vec![v] }
    }

    pub fn nvars(&self) -> usize {
        self.terms.first().map_or(0, |v| v.nvars())
    }

    pub fn at(&self, t: &GaussRat) -> ExactField {
        let mut acc = VectorField::zero(self.nvars());
        let mut power = GaussRat::one();
        for v in &self.terms {
            acc = acc.add(&v.scale(&power));
            power = power * t.clone();
        }
        acc
    }

    fn compiled(&self) -> Vec<Vec<Compiled>> {
        self.terms.iter().map(|v| v.components().iter().map(Compiled::new).collect()).collect()
    }
}

fn eval_time_field(c: &[Vec<Compiled>], t: f64, x: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); x.len()];
    let mut power = 1.0;
    for comps in c {
        for (o, p) in out.iter_mut().zip(comps) {
            *o += p.eval(x) * power;
        }
        power *= t;
    }
    out
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn rk4(f: &dyn Fn(f64, &[Complex64]) -> Vec<Complex64>, x0: &[Complex64], t0: f64, t1: f64, steps: usize) -> Vec<Complex64> {
    let h = (t1 - t0) / steps as f64;
    let mut x = x0.to_vec();
    let axpy = |x: &[Complex64], k: &[Complex64], c: f64| -> Vec<Complex64> { x.iter().zip(k).map(|(a, b)| a + b * c).collect() };
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = f(t, &x);
        let k2 = f(t + h / 2.0, &axpy(&x, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&x, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    x
}

/// Fixed-step RK4 with the step count doubled until two successive results
/// agree to `tol`; returns the Richardson-extrapolated value.
pub fn ode_flow(
    f: &dyn Fn(f64, &[Complex64]) -> Vec<Complex64>,
    x0: &[Complex64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<Vec<Complex64>, DynamicsError> {
    let mut steps = 8;
    let mut prev = rk4(f, x0, t0, t1, steps);
    while steps < 1 << 18 {
        steps *= 2;
        let cur = rk4(f, x0, t0, t1, steps);
        if cur.iter().chain(&prev).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(DynamicsError::OracleDiverged);
        }
        let diff = distance(&cur, &prev);
        if diff <= tol * (1.0 + norm(&cur)) {
            return Ok(cur.iter().zip(&prev).map(|(c, p)| c + (c - p) / 15.0).collect());
        }
        prev = cur;
    }
    Err(DynamicsError::OracleDiverged)
}

/// Tolerance used by the ODE oracle in convergence reports.
pub const ORACLE_TOL: f64 = 1e-13;

/// Seeded points uniformly distributed in the ball of radius `r` in ℂⁿ.
pub fn sample_ball(n: usize, count: usize, r: f64, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g: Vec<f64> = (0..2 * n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rad = r * rng.gen::<f64>().powf(1.0 / (2 * n) as f64);
            (0..n).map(|k| Complex64::new(g[2 * k], g[2 * k + 1]) * (rad / len)).collect()
        })
        .collect()
}

/// Error of a family of approximations against a reference, measured at a
/// list of parameter values.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    /// `"steps"` or `"time"`.
    pub parameter: String,
    pub values: Vec<f64>,
    /// Max Euclidean error over the sample points, per value.
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log value`.
    pub slope: f64,
    /// Error decay rate: `−slope` for step counts, `slope` for times.
    pub order: f64,
    /// Whether errors strictly decrease as the approximation is refined.
    pub monotone: bool,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64, DynamicsError> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(DynamicsError::TooFewSamples);
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

impl ConvergenceReport {
    fn build(parameter: &str, values: Vec<f64>, errors: Vec<f64>, refine_increasing: bool) -> Result<Self, DynamicsError> {
        let slope = fit_slope(&values, &errors)?;
        let order = if refine_increasing { -slope } else { slope };
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        if !refine_increasing {
            idx.reverse();
        }
        let monotone = idx.windows(2).all(|w| errors[w[1]] < errors[w[0]]);
        Ok(ConvergenceReport { schema_version: SCHEMA_VERSION, parameter: parameter.into(), values, errors, slope, order, monotone })
    }
}

/// Max distance between `seq` and `reference` over `points`.
pub fn max_error(seq: &AutoSeq, reference: &dyn Fn(&[Complex64]) -> Vec<Complex64>, points: &[Vec<Complex64>]) -> f64 {
    points.iter().map(|p| distance(&seq.apply(p), &reference(p))).fold(0.0, f64::max)
}

/// The time-`t` flow of an autonomous field computed by the ODE oracle.
pub fn oracle_flow(v: &ExactField, t: f64, x: &[Complex64]) -> Result<Vec<Complex64>, DynamicsError> {
    let c = vec![v.components().iter().map(Compiled::new).collect::<Vec<_>>()];
    ode_flow(&|s, y| eval_time_field(&c, s, y), x, 0.0, t, ORACLE_TOL)
}

/// Splitting error against `reference` (the exact time-`t` flow of the sum of
/// targets) for each step count.
pub fn trotter_convergence(
    prims: &[CompletePrimitive],
    t: f64,
    steps: &[usize],
    reference: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    points: &[Vec<Complex64>],
    opts: StepOptions,
) -> Result<ConvergenceReport, DynamicsError> {
    let errors = steps
        .iter()
        .map(|&m| Ok(max_error(&trotter_compose(prims, t, m, opts)?, reference, points)))
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    ConvergenceReport::build("steps", steps.iter().map(|&m| m as f64).collect(), errors, true)
}

/// Commutator error against `reference(s, x)`, the time-`s` flow of `[A, B]`.
pub fn commutator_convergence(
    a: &ExactField,
    b: &ExactField,
    times: &[f64],
    reference: &dyn Fn(f64, &[Complex64]) -> Vec<Complex64>,
    points: &[Vec<Complex64>],
    scheme: CommutatorScheme,
) -> Result<ConvergenceReport, DynamicsError> {
    let errors = times
        .iter()
        .map(|&s| Ok(max_error(&commutator_with(a, b, s, scheme)?, &|x| reference(s, x), points)))
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    ConvergenceReport::build("time", times.to_vec(), errors, false)
}

#[derive(Debug, Clone)]
pub struct IsotopyApproximation {
    pub seq: AutoSeq,
    pub primitives_per_slice: Vec<usize>,
    pub max_error: f64,
}

/// Slices `[0, T]` into `steps` pieces, freezes the field at each midpoint,
/// decomposes it and runs `substeps` splitting steps; the error is measured
/// against the ODE oracle for the time-dependent field.
pub fn approximate_isotopy(
    vt: &TimeDependentField,
    t: f64,
    steps: usize,
    substeps: usize,
    points: &[Vec<Complex64>],
    opts: StepOptions,
) -> Result<IsotopyApproximation, DynamicsError> {
    check_time(t)?;
    if steps == 0 || substeps == 0 {
        return Err(DynamicsError::ZeroSteps);
    }
    let n = vt.nvars();
    let dt = t / steps as f64;
    let mut seq = AutoSeq::identity(n);
    let mut counts = Vec::new();
    for k in 0..steps {
        let mid = GaussRat::from_f64_exact(dt * (k as f64 + 0.5), 0.0).ok_or(DynamicsError::BadTime)?;
        let prims = decompose_field(&vt.at(&mid))?;
        counts.push(prims.len());
        if prims.is_empty() {
            continue;
        }
        seq = seq.then(&trotter_compose(&prims, dt, substeps, opts)?);
    }
    let c = vt.compiled();
    let mut max_err: f64 = 0.0;
    for p in points {
        let exact = ode_flow(&|s, y| eval_time_field(&c, s, y), p, 0.0, t, ORACLE_TOL)?;
        max_err = max_err.max(distance(&seq.apply(p), &exact));
    }
    Ok(IsotopyApproximation { seq, primitives_per_slice: counts, max_error: max_err })
}

pub fn isotopy_convergence(
    vt: &TimeDependentField,
    t: f64,
    steps: usize,
    substeps: &[usize],
    points: &[Vec<Complex64>],
    opts: StepOptions,
) -> Result<ConvergenceReport, DynamicsError> {
    let errors = substeps
        .iter()
        .map(|&m| Ok(approximate_isotopy(vt, t, steps, m, points, opts)?.max_error))
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    ConvergenceReport::build("steps", substeps.iter().map(|&m| m as f64).collect(), errors, true)
}

/// Points `origin + a·u + b·v` on a `rows × cols` grid over the given ranges;
/// `a` varies along columns and `b` along rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub rows: usize,
    pub cols: usize,
}

impl GridSpec {
    /// The real plane spanned by the first two coordinates.
    pub fn real_plane(n: usize, half_width: f64, rows: usize, cols: usize) -> Self {
        let unit = |k: usize| (0..n).map(|i| Complex64::new((i == k) as u8 as f64, 0.0)).collect();
        GridSpec {
            origin: vec![Complex64::zero(); n],
            u: unit(0),
            v: unit(1),
            a_range: (-half_width, half_width),
            b_range: (-half_width, half_width),
            rows,
            cols,
        }
    }

    fn coord(range: (f64, f64), k: usize, count: usize) -> f64 {
        if count <= 1 {
            range.0
        } else {
            range.0 + (range.1 - range.0) * k as f64 / (count - 1) as f64
        }
    }

    pub fn params(&self, row: usize, col: usize) -> (f64, f64) {
        (Self::coord(self.a_range, col, self.cols), Self::coord(self.b_range, row, self.rows))
    }

    pub fn point(&self, row: usize, col: usize) -> Vec<Complex64> {
        let (a, b) = self.params(row, col);
        self.origin.iter().zip(&self.u).zip(&self.v).map(|((o, u), v)| o + u * a + v * b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinParams {
    pub max_iter: usize,
    pub attract_radius: f64,
    pub escape_radius: f64,
    /// Allowed `|F(p) − p|` at the fixed point.
    pub fixed_tolerance: f64,
}

impl Default for BasinParams {
    fn default() -> Self {
        BasinParams { max_iter: 500, attract_radius: 1e-6, escape_radius: 1e6, fixed_tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Attracted,
    Escaped,
    Undecided,
}

impl PointClass {
    pub fn name(self) -> &'static str {
        match self {
            PointClass::Attracted => "attracted",
            PointClass::Escaped => "escaped",
            PointClass::Undecided => "undecided",
        }
    }

    fn gray(self) -> u8 {
        match self {
            PointClass::Attracted => 255,
            PointClass::Undecided => 128,
            PointClass::Escaped => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinCell {
    pub row: usize,
    pub col: usize,
    pub a: f64,
    pub b: f64,
    pub class: PointClass,
    pub iters: usize,
    /// The orbit produced a non-finite value.
    pub overflow: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasinReport {
    pub rows: usize,
    pub cols: usize,
    pub spectral_radius: f64,
    pub warnings: Vec<String>,
    pub cells: Vec<BasinCell>,
}

impl BasinReport {
    pub fn count(&self, class: PointClass) -> usize {
        self.cells.iter().filter(|c| c.class == class).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,re,im,class,iters\n");
        for c in &self.cells {
            s.push_str(&format!("{},{},{},{},{},{}\n", c.row, c.col, c.a, c.b, c.class.name(), c.iters));
        }
        s
    }

    /// Binary 8-bit PGM: attracted 255, undecided 128, escaped 0.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.cols, self.rows).into_bytes();
        out.extend(self.cells.iter().map(|c| c.class.gray()));
        out
    }
}

/// Jacobian of `f` at `p` by central differences.
pub fn jacobian(f: &AutoSeq, p: &[Complex64]) -> nalgebra::DMatrix<Complex64> {
    let n = p.len();
    let h = 1e-6;
    let mut j = nalgebra::DMatrix::zeros(n, n);
    for l in 0..n {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[l] += h;
        minus[l] -= h;
        let (fp, fm) = (f.apply(&plus), f.apply(&minus));
        for k in 0..n {
            j[(k, l)] = (fp[k] - fm[k]) / (2.0 * h);
        }
    }
    j
}

pub fn spectral_radius(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    m.clone()
        .schur()
        .eigenvalues()
        .map(|ev| ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .unwrap_or(f64::NAN)
}

fn classify(f: &AutoSeq, fixed: &[Complex64], start: Vec<Complex64>, params: &BasinParams) -> (PointClass, usize, bool) {
    let mut x = start;
    for it in 0..=params.max_iter {
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return (PointClass::Escaped, it, true);
        }
        let d = distance(&x, fixed);
        if d < params.attract_radius {
            return (PointClass::Attracted, it, false);
        }
        if d > params.escape_radius {
            return (PointClass::Escaped, it, false);
        }
        if it < params.max_iter {
            f.apply_in_place(&mut x);
        }
    }
    (PointClass::Undecided, params.max_iter, false)
}

/// Iterates `f` from every grid point and records where the orbit ends up.
pub fn basin_sample(f: &AutoSeq, fixed: &[Complex64], grid: &GridSpec, params: &BasinParams) -> Result<BasinReport, DynamicsError> {
    let n = f.nvars();
    for v in [fixed, &grid.origin[..], &grid.u[..], &grid.v[..]] {
        if v.len() != n {
            return Err(DynamicsError::Dimension { expected: n, got: v.len() });
        }
    }
    let drift = distance(&f.apply(fixed), fixed);
    if !(drift <= params.fixed_tolerance) {
        return Err(DynamicsError::NotFixed(drift));
    }
    let rho = spectral_radius(&jacobian(f, fixed));
    let mut warnings = Vec::new();
    if !(rho < 1.0) {
        warnings.push(format!("spectral radius {rho:.6} at the fixed point is not below 1"));
    }
    let cells = (0..grid.rows * grid.cols)
        .into_par_iter()
        .map(|k| {
            let (row, col) = (k / grid.cols, k % grid.cols);
            let (a, b) = grid.params(row, col);
            let (class, iters, overflow) = classify(f, fixed, grid.point(row, col), params);
            BasinCell { row, col, a, b, class, iters, overflow }
        })
        .collect();
    Ok(BasinReport { rows: grid.rows, cols: grid.cols, spectral_radius: rho, warnings, cells })
}

/// `F(x, y) = (λy, −λ(x + y²))` with `λ = 1/2`: the shear `(x + y², y)`, the
/// quarter turn `(y, −x)` written as three linear shears, then a uniform
/// contraction. The origin is an attracting fixed point.
pub fn designated_map() -> AutoSeq {
    let n = 2;
    let one = Time::Exact(GaussRat::one());
    let shear = |dir: usize, p: &str, t: &Time| Elementary::Shear {
        dir,
        coeff: Coefficient::new(parse(p, n).expect("valid")),
        time: t.clone(),
    };
    let minus = Time::Exact(GaussRat::int(-1));
    AutoSeq::from_factors(
        n,
        vec![
            Elementary::Scaling { weights: vec![1, 1], lambda: Time::Exact(GaussRat::ratio(1, 2)) },
            shear(0, "x2", &one),
            shear(1, "x1", &minus),
            shear(0, "x2", &one),
            shear(0, "x2^2", &one),
        ],
    )
}

/// The default slice for [`designated_map`]: the real plane over `[−2, 2]²`.
pub fn designated_grid() -> GridSpec {
    GridSpec::real_plane(2, 2.0, 200, 200)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_field;

    fn vf(s: &str) -> ExactField {
        parse_field(s).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn decompose_examples() {
        let p = decompose_field(&vf("[x2^2; 0]")).unwrap();
        assert_eq!(p.len(), 1);
        assert!(matches!(&p[0], CompletePrimitive::Shear { dir: 0, .. }));
        let p = decompose_field(&vf("[0; x2^2]")).unwrap();
        match &p[0] {
            CompletePrimitive::BracketPair { dir, aux, f1, f2, factors } => {
                assert_eq!((*dir, *aux), (1, 0));
                assert_eq!(f1.to_string(), "x2^2");
                assert_eq!(f2.to_string(), "1");
                assert_eq!(factors[0], vf("[x2^2; 0]"));
                assert_eq!(factors[1], vf("[0; x1]"));
                assert_eq!(factors[2], vf("[x1*x2^2; 0]"));
                assert_eq!(factors[3], vf("[0; 1]"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let v = vf("[x1^3 - 2*x1*x2 + i; x1*x2^2 + 1/3*x2; x3^2*x1 + x3]");
        assert_eq!(recompose(&decompose_field(&v).unwrap(), 3), v);
        assert!(matches!(decompose_field(&vf("[x1]")), Err(DynamicsError::TooFewVariables)));
    }

    #[test]
    fn generators_are_classified() {
        assert!(matches!(Generator::from_field(&vf("[x2; 0]")).unwrap(), Generator::Shear { dir: 0, .. }));
        assert!(matches!(Generator::from_field(&vf("[x1*x2; 0]")).unwrap(), Generator::Overshear { dir: 0, .. }));
        assert!(matches!(Generator::from_field(&vf("[x2; x3; 0]")).unwrap(), Generator::Flow(_)));
        assert!(Generator::from_field(&vf("[x1^2; 0]")).is_err());
        assert!(Generator::from_field(&vf("[x2; x1]")).is_err());
    }

    #[test]
    fn overshear_flow_is_exponential() {
        let g = Generator::from_field(&vf("[x1*x2; 0]")).unwrap();
        let seq = AutoSeq::from_factors(2, vec![g.at(Time::real(0.3))]);
        let y = seq.apply(&[c(2.0, 0.0), c(0.5, 0.1)]);
        let expect = c(2.0, 0.0) * (c(0.5, 0.1) * 0.3).exp();
        assert!((y[0] - expect).norm() < 1e-14);
    }

    #[test]
    fn commutator_of_translations_and_shears() {
        let s = 0.04;
        let seq = commutator_step(&vf("[1; 0]"), &vf("[0; x1]"), s).unwrap();
        let y = seq.apply(&[c(0.3, 0.0), c(-0.2, 0.5)]);
        assert!((y[0] - c(0.3, 0.0)).norm() < 1e-15);
        assert!((y[1] - c(-0.2 + s, 0.5)).norm() < 1e-14);
        let seq = commutator_step(&vf("[1; 0]"), &vf("[0; 1]"), 0.3).unwrap();
        let p = [c(0.1, 0.2), c(0.3, -0.4)];
        assert!(distance(&seq.apply(&p), &p) < 1e-15);
        assert!(commutator_step(&vf("[1; 0]"), &vf("[0; 1]"), 0.0).unwrap().is_empty());
        assert!(commutator_step(&vf("[x1^2; 0]"), &vf("[0; 1]"), 0.1).is_err());
        assert!(commutator_step(&vf("[1; 0]"), &vf("[0; 1]"), -0.1).is_err());
    }

    #[test]
    fn inverse_law_in_floating_regime() {
        let prims = decompose_field(&vf("[x2^2 + x1; x1*x2 - 1]")).unwrap();
        let seq = trotter_compose(&prims, 0.3, 3, StepOptions::default()).unwrap().then(&designated_map());
        let inv = seq.inverse();
        for p in sample_ball(2, 100, 1.0, 1) {
            let back = inv.apply(&seq.apply(&p));
            assert!(distance(&back, &p) <= 1e-12 * norm(&p).max(1.0), "{p:?}");
        }
    }

    #[test]
    fn inverse_law_in_exact_regime() {
        let map = designated_map();
        let exact = map.exact_map().unwrap();
        let inv = map.inverse().exact_map().unwrap();
        assert!(exact.compose(&inv).unwrap().is_identity());
        assert_eq!(exact.to_string(), "((1/2)*x2, -(1/2)*x2^2 - (1/2)*x1)");
        assert!(trotter_compose(&decompose_field(&vf("[0; x2^2]")).unwrap(), 0.1, 1, StepOptions::default())
            .unwrap()
            .exact_map()
            .is_none());
    }

    #[test]
    fn single_and_commuting_shears_are_exact() {
        let pts = sample_ball(2, 10, 0.5, 2);
        let prims = decompose_field(&vf("[x2^2; 0]")).unwrap();
        for m in [1, 3, 8] {
            let seq = trotter_compose(&prims, 0.7, m, StepOptions::default()).unwrap();
            let err = max_error(&seq, &|x| vec![x[0] + x[1] * x[1] * 0.7, x[1]], &pts);
            assert!(err < 1e-14);
        }
        let prims = decompose_field(&vf("[0; x1^2 + 3*x1]")).unwrap();
        assert_eq!(prims.len(), 2);
        let seq = trotter_compose(&prims, 0.5, 4, StepOptions::default()).unwrap();
        let err = max_error(&seq, &|x| vec![x[0], x[1] + (x[0] * x[0] + x[0] * 3.0) * 0.5], &pts);
        assert!(err < 1e-14);
    }

    #[test]
    fn riccati_splitting_is_first_order() {
        let prims = decompose_field(&vf("[0; x2^2]")).unwrap();
        let pts = sample_ball(2, 25, 0.5, crate::sample::DEFAULT_SEED);
        let t = 0.5;
        let exact = |x: &[Complex64]| vec![x[0], x[1] / (1.0 - x[1] * t)];
        let r = trotter_convergence(&prims, t, &[8, 16, 32, 64], &exact, &pts, StepOptions::default()).unwrap();
        assert!(r.monotone, "{r:?}");
        assert!((0.8..=1.5).contains(&r.order), "{r:?}");
        let strang = StepOptions { splitting: Splitting::Strang, ..Default::default() };
        let r = trotter_convergence(&prims, t, &[8, 16, 32, 64], &exact, &pts, strang).unwrap();
        assert!(r.monotone && r.order >= 0.8, "{r:?}");
    }

    #[test]
    fn plain_commutator_splitting_is_half_order() {
        let prims = decompose_field(&vf("[0; x2^2]")).unwrap();
        let pts = sample_ball(2, 25, 0.5, crate::sample::DEFAULT_SEED);
        let exact = |x: &[Complex64]| vec![x[0], x[1] / (1.0 - x[1] * 0.5)];
        let plain = StepOptions { commutator: CommutatorScheme::Plain, ..Default::default() };
        let r = trotter_convergence(&prims, 0.5, &[8, 16, 32, 64], &exact, &pts, plain).unwrap();
        assert!((0.35..0.7).contains(&r.order), "{r:?}");
    }

    #[test]
    fn commutator_order_against_hyperbolic_flow() {
        let pts = sample_ball(2, 25, 0.5, crate::sample::DEFAULT_SEED);
        let a = vf("[x2; 0]");
        let b = vf("[0; x1]");
        assert_eq!(a.lie_bracket(&b), vf("[-x1; x2]"));
        let exact = |s: f64, x: &[Complex64]| vec![x[0] * (-s).exp(), x[1] * s.exp()];
        let times = [0.08, 0.04, 0.02, 0.01, 0.005];
        let r = commutator_convergence(&a, &b, &times, &exact, &pts, CommutatorScheme::Plain).unwrap();
        assert!(r.monotone && (1.3..=2.1).contains(&r.order), "{r:?}");
        let r = commutator_convergence(&a, &b, &times, &exact, &pts, CommutatorScheme::Symmetric).unwrap();
        assert!(r.order > 1.8, "{r:?}");
    }

    #[test]
    fn ode_oracle_matches_closed_forms() {
        let x = [c(0.2, 0.1), c(0.3, -0.2)];
        let y = oracle_flow(&vf("[0; x2^2]"), 0.5, &x).unwrap();
        assert!((y[1] - x[1] / (1.0 - x[1] * 0.5)).norm() < 1e-12);
        let y = oracle_flow(&vf("[-x1; x2]"), 0.7, &x).unwrap();
        assert!((y[0] - x[0] * (-0.7f64).exp()).norm() < 1e-12);
    }

    #[test]
    fn isotopy_examples() {
        let pts = sample_ball(2, 10, 0.5, 5);
        let translation = TimeDependentField::autonomous(vf("[1; 0]"));
        let r = approximate_isotopy(&translation, 1.0, 2, 1, &pts, StepOptions::default()).unwrap();
        assert!(r.max_error < 1e-12);
        let linear = TimeDependentField::autonomous(vf("[x1; -x2]"));
        let r = isotopy_convergence(&linear, 0.5, 1, &[4, 8, 16, 32], &pts, StepOptions::default()).unwrap();
        assert!(r.monotone && r.order >= 0.8, "{r:?}");
        let riccati = TimeDependentField::autonomous(vf("[0; x2^2]"));
        let a = approximate_isotopy(&riccati, 0.5, 1, 16, &pts, StepOptions::default()).unwrap();
        let prims = decompose_field(&vf("[0; x2^2]")).unwrap();
        let b = trotter_compose(&prims, 0.5, 16, StepOptions::default()).unwrap();
        let direct = max_error(&b, &|x| vec![x[0], x[1] / (1.0 - x[1] * 0.5)], &pts);
        assert!((a.max_error - direct).abs() < 1e-10);
        // a genuinely time-dependent field: x' = (t, 0)
        let drift = TimeDependentField { terms: vec![vf("[0; 0]"), vf("[1; 0]")] };
        let r = approximate_isotopy(&drift, 1.0, 4, 1, &pts, StepOptions::default()).unwrap();
        assert!(r.max_error < 1e-12);
    }

    #[test]
    fn contraction_basin_is_everything() {
        let contraction = AutoSeq::from_factors(
            2,
            vec![Elementary::Scaling { weights: vec![1, 1], lambda: Time::real((-1.0f64).exp()) }],
        );
        let grid = GridSpec::real_plane(2, 3.0, 9, 9);
        let r = basin_sample(&contraction, &[c(0.0, 0.0); 2], &grid, &BasinParams::default()).unwrap();
        assert_eq!(r.count(PointClass::Attracted), 81);
        assert!((r.spectral_radius - (-1.0f64).exp()).abs() < 1e-6);
        let empty = GridSpec { rows: 0, cols: 0, ..grid };
        assert!(basin_sample(&contraction, &[c(0.0, 0.0); 2], &empty, &BasinParams::default()).unwrap().cells.is_empty());
    }

    #[test]
    fn designated_map_agrees_with_direct_iteration() {
        let f = designated_map();
        let direct = |x: f64, y: f64| (0.5 * y, -0.5 * (x + y * y));
        let params = BasinParams::default();
        let picks = [(0.0, 0.0), (0.05, -0.05), (0.5, 0.5), (-1.0, 0.3), (1.2, -1.1), (2.0, 2.0), (-2.0, -2.0), (0.0, 2.0), (1.9, 0.0), (-0.7, 1.6)];
        for (x0, y0) in picks {
            let (mut x, mut y): (f64, f64) = (x0, y0);
            let mut expected = PointClass::Undecided;
            for _ in 0..=params.max_iter {
                let d = (x * x + y * y).sqrt();
                if d < params.attract_radius {
                    expected = PointClass::Attracted;
                    break;
                }
                if !d.is_finite() || d > params.escape_radius {
                    expected = PointClass::Escaped;
                    break;
                }
                (x, y) = direct(x, y);
            }
            let (got, _, _) = classify(&f, &[c(0.0, 0.0); 2], vec![c(x0, 0.0), c(y0, 0.0)], &params);
            assert_eq!(got, expected, "({x0}, {y0})");
        }
    }

    #[test]
    fn basin_output_formats() {
        let grid = GridSpec::real_plane(2, 2.0, 3, 4);
        let r = basin_sample(&designated_map(), &[c(0.0, 0.0); 2], &grid, &BasinParams::default()).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("row,col,re,im,class,iters\n0,0,-2,-2,"));
        assert_eq!(csv.lines().count(), 13);
        let pgm = r.to_pgm();
        assert!(pgm.starts_with(b"P5\n4 3\n255\n"));
        assert_eq!(pgm.len(), b"P5\n4 3\n255\n".len() + 12);
        assert!(matches!(
            basin_sample(&designated_map(), &[c(1.0, 0.0), c(0.0, 0.0)], &grid, &BasinParams::default()),
            Err(DynamicsError::NotFixed(_))
        ));
    }

    #[test]
    fn autoseq_json_round_trip() {
        let seq = designated_map().then(&commutator_step(&vf("[x2; 0]"), &vf("[0; x1]"), 0.25).unwrap());
        let json = serde_json::to_string(&seq).unwrap();
        let back: AutoSeq = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        let p = [c(0.3, 0.1), c(-0.2, 0.4)];
        assert!(distance(&seq.apply(&p), &back.apply(&p)) < 1e-15);
        let bad = r#"{"nvars": 2, "factors": [{"kind": "shear", "direction": 1, "coeff": "x1", "time": "1"}]}"#;
        assert!(serde_json::from_str::<AutoSeq>(bad).is_err());
    }
}
