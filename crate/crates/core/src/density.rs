//! Bracket identities, compatibility of derivation pairs, Lie-closure span
//! certificates and orbit spans.
//!
//! Every certificate here is one-sided: a positive verdict is an exact,
//! replayable proof of a containment at the stated degree bound, while
//! `NotEstablished` carries no information.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{kernel_basis, nilpotency_report, ExactField, FieldError, VectorField, DEFAULT_NILPOTENCY_CAP};
use crate::linalg::{self, Combination, SpanTracker};
use crate::poly::{Exponent, ExactPoly, MonomialBasis, Poly, PolyError};
use crate::scalar::{GaussRat, Scalar};

/// Version tag embedded in every JSON certificate.
pub const SCHEMA_VERSION: u32 = 1;

/// Default bracket-depth cap for [`lie_closure`].
pub const DEFAULT_DEPTH: usize = 6;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("precondition violated: {}", .0.join("; "))]
    Precondition(Vec<String>),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("first field is not locally nilpotent")]
    NotNilpotent,
    #[error("second field is neither locally nilpotent nor diagonal with integer weights")]
    NotNilpotentOrDiagonal,
    #[error("point {point} is not on the variety: generator {generator} evaluates to {value}")]
    OffVariety { point: usize, generator: usize, value: Box<GaussRat> },
    #[error("could not sample a determinant-one matrix after {0} attempts")]
    SamplingExhausted(usize),
    #[error("matrix size must be at least 2")]
    MatrixTooSmall,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Error)]
#[error("replay failed: {0}")]
pub struct ReplayError(pub String);

/// Outcome of an exact identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub holds: bool,
    pub lhs: ExactField,
    pub rhs: ExactField,
    pub residual: ExactField,
}

impl IdentityCheck {
    pub(crate) fn new(lhs: ExactField, rhs: ExactField) -> Self {
        let residual = lhs.sub(&rhs);
        IdentityCheck { holds: residual.is_zero(), lhs, rhs, residual }
    }
}

fn require(failures: Vec<String>) -> Result<(), DensityError> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(DensityError::Precondition(failures))
    }
}

fn same_nvars(polys: &[&ExactPoly]) -> Result<usize, DensityError> {
    let n = polys[0].nvars();
    for p in polys {
        if p.nvars() != n {
            return Err(PolyError::NvarsMismatch { left: n, right: p.nvars() }.into());
        }
    }
    Ok(n)
}

/// `[f₁∂₁, x₁f₂∂₂] − [x₁f₁∂₁, f₂∂₂] = f₁f₂∂₂` for `f₁ ∈ Ker ∂₁`, `f₂ ∈ Ker ∂₂`.
pub fn verify_shear_identity(f1: &ExactPoly, f2: &ExactPoly) -> Result<IdentityCheck, DensityError> {
    let n = same_nvars(&[f1, f2])?;
    if n < 2 {
        return Err(DensityError::Precondition(vec!["need at least two variables".into()]));
    }
    let mut bad = Vec::new();
    if f1.depends_on(0) {
        bad.push("f1 depends on x1".to_string());
    }
    if f2.depends_on(1) {
        bad.push("f2 depends on x2".to_string());
    }
    require(bad)?;
    let x1 = Poly::var(n, 0);
    let d1 = VectorField::along(n, 0, f1.clone());
    let d2 = VectorField::along(n, 1, f2.clone());
    let lhs = d1.lie_bracket(&d2.mul_poly(&x1)).sub(&d1.mul_poly(&x1).lie_bracket(&d2));
    let rhs = VectorField::along(n, 1, f1 * f2);
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `[a f₁δ₁, f₂δ₂] − [f₁δ₁, a f₂δ₂] = −b f₁f₂δ₂` with `b = δ₁(a)`.
pub fn verify_compat_identity(
    d1: &ExactField,
    d2: &ExactField,
    a: &ExactPoly,
    f1: &ExactPoly,
    f2: &ExactPoly,
) -> Result<IdentityCheck, DensityError> {
    let n = same_nvars(&[a, f1, f2])?;
    if d1.nvars() != n || d2.nvars() != n {
        return Err(PolyError::NvarsMismatch { left: n, right: d1.nvars().max(d2.nvars()) }.into());
    }
    let b = d1.apply(a);
    let mut bad = Vec::new();
    if !d1.apply(f1).is_zero() {
        bad.push("f1 is not in Ker δ1".to_string());
    }
    if !d2.apply(f2).is_zero() {
        bad.push("f2 is not in Ker δ2".to_string());
    }
    if !d2.apply(a).is_zero() {
        bad.push("a is not in Ker δ2".to_string());
    }
    if b.is_zero() {
        bad.push("b = δ1(a) is zero".to_string());
    } else if !d1.apply(&b).is_zero() {
        bad.push("b = δ1(a) is not in Ker δ1".to_string());
    }
    require(bad)?;
    let lhs = d1
        .mul_poly(&(a * f1))
        .lie_bracket(&d2.mul_poly(f2))
        .sub(&d1.mul_poly(f1).lie_bracket(&d2.mul_poly(&(a * f2))));
    let rhs = d2.mul_poly(&(&(&b * f1) * f2)).neg();
    Ok(IdentityCheck::new(lhs, rhs))
}

/// A polynomial written as `Σ c · K₁[i] · K₂[j]`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductMembership {
    pub target: ExactPoly,
    /// `(i, j, c)` triples.
    pub combination: Vec<(usize, usize, GaussRat)>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConditionI {
    IdealFoundUpToDegree { h: ExactPoly, degree: u32 },
    FullSpanUpToDegree { degree: u32 },
    NotEstablished,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConditionII {
    WitnessFound { a: ExactPoly, b: ExactPoly },
    NotEstablished,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityVerdict {
    pub schema_version: u32,
    pub delta1: ExactField,
    pub delta2: ExactField,
    pub degree_bound: u32,
    pub candidates: Vec<ExactPoly>,
    pub condition_i: ConditionI,
    pub condition_ii: ConditionII,
    pub kernel1: Vec<ExactPoly>,
    pub kernel2: Vec<ExactPoly>,
    pub product_span_dimension: usize,
    pub ambient_dimension: usize,
    /// Replay data for condition (i).
    pub memberships: Vec<ProductMembership>,
}

impl CompatibilityVerdict {
    pub fn established(&self) -> bool {
        !matches!(self.condition_i, ConditionI::NotEstablished)
            && matches!(self.condition_ii, ConditionII::WitnessFound { .. })
    }

    /// Re-checks every recorded membership and the witness from scratch.
    pub fn replay(&self) -> Result<usize, ReplayError> {
        let mut checked = 0;
        for m in &self.memberships {
            let n = m.target.nvars();
            let mut acc = Poly::zero(n);
            for (i, j, c) in &m.combination {
                let (k1, k2) = (self.kernel1.get(*i), self.kernel2.get(*j));
                let (Some(k1), Some(k2)) = (k1, k2) else {
                    return Err(ReplayError(format!("kernel index ({i}, {j}) out of range")));
                };
                if !self.delta1.apply(k1).is_zero() || !self.delta2.apply(k2).is_zero() {
                    return Err(ReplayError("recorded kernel element is not in the kernel".into()));
                }
                acc = &acc + &(k1 * k2).scale(c);
            }
            if acc != m.target {
                return Err(ReplayError(format!("combination does not reproduce {}", m.target)));
            }
            checked += 1;
        }
        if let ConditionII::WitnessFound { a, b } = &self.condition_ii {
            if !self.delta2.apply(a).is_zero() || self.delta1.apply(a) != *b || b.is_zero() || !self.delta1.apply(b).is_zero() {
                return Err(ReplayError("witness conditions fail".into()));
            }
            checked += 1;
        }
        Ok(checked)
    }
}

/// Checks the two compatibility conditions at truncated degree `d`.
///
/// Condition (i) asks whether the span of products of kernel elements of
/// degree ≤ `d` contains every polynomial of degree ≤ `d` (the unit ideal), or
/// else `⟨h⟩ ∩ {deg ≤ d}` for one of the supplied `candidates`. Condition (ii)
/// looks for the graded-lex smallest `a ∈ Ker δ₂` with `δ₁(a) ∈ Ker δ₁ ∖ 0`.
pub fn check_compatibility(
    d1: &ExactField,
    d2: &ExactField,
    d: u32,
    candidates: &[ExactPoly],
) -> Result<CompatibilityVerdict, DensityError> {
    let n = d1.nvars();
    if d2.nvars() != n {
        return Err(PolyError::NvarsMismatch { left: n, right: d2.nvars() }.into());
    }
    if !nilpotency_report(d1, DEFAULT_NILPOTENCY_CAP).is_nilpotent() {
        return Err(DensityError::NotNilpotent);
    }
    if !nilpotency_report(d2, DEFAULT_NILPOTENCY_CAP).is_nilpotent() && d2.diagonal_weights().is_none() {
        return Err(DensityError::NotNilpotentOrDiagonal);
    }
    let k1 = kernel_basis(d1, d);
    let k2 = kernel_basis(d2, d);
    let basis = MonomialBasis::new(n, d);

    let mut tracker = SpanTracker::new(basis.len());
    let mut accepted: Vec<(usize, usize)> = Vec::new();
    for (i, a) in k1.iter().enumerate() {
        for (j, b) in k2.iter().enumerate() {
            if a.degree() + b.degree() > d as i64 {
                continue;
            }
            let prod = a * b;
            let coords = basis.coordinates(&prod).expect("degree checked");
            if tracker.insert(&coords) {
                accepted.push((i, j));
            }
        }
    }
    let record = |target: &ExactPoly| -> Option<ProductMembership> {
        let coords = basis.coordinates(target)?;
        let combo = tracker.express(&coords)?;
        Some(ProductMembership {
            target: target.clone(),
            combination: combo.into_iter().map(|(k, c)| (accepted[k].0, accepted[k].1, c)).collect(),
        })
    };

    let mut memberships = Vec::new();
    let condition_i = if tracker.is_full() {
        for e in basis.monomials() {
            memberships.push(record(&Poly::monomial(n, e.clone(), GaussRat::one())).expect("full span"));
        }
        ConditionI::FullSpanUpToDegree { degree: d }
    } else {
        let mut found = ConditionI::NotEstablished;
        for h in candidates {
            if h.is_zero() || h.nvars() != n || h.degree() > d as i64 {
                continue;
            }
            let room = d - h.degree() as u32;
            let targets: Vec<ExactPoly> = MonomialBasis::new(n, room)
                .monomials()
                .iter()
                .map(|m| h.mul_monomial(m, &GaussRat::one()))
                .collect();
            let recs: Option<Vec<_>> = targets.iter().map(&record).collect();
            if let Some(recs) = recs {
                memberships = recs;
                found = ConditionI::IdealFoundUpToDegree { h: h.clone(), degree: d };
                break;
            }
        }
        found
    };

    let condition_ii = degree_one_witness(d1, &k2, n, d);

    Ok(CompatibilityVerdict {
        schema_version: SCHEMA_VERSION,
        delta1: d1.clone(),
        delta2: d2.clone(),
        degree_bound: d,
        candidates: candidates.to_vec(),
        condition_i,
        condition_ii,
        product_span_dimension: tracker.rank(),
        ambient_dimension: basis.len(),
        kernel1: k1,
        kernel2: k2,
        memberships,
    })
}

fn degree_one_witness(d1: &ExactField, k2: &[ExactPoly], n: usize, d: u32) -> ConditionII {
    if k2.is_empty() {
        return ConditionII::NotEstablished;
    }
    // {c : δ₁²(Σ c_k K₂[k]) = 0}
    let second: Vec<ExactPoly> = k2.iter().map(|k| d1.apply(&d1.apply(k))).collect();
    let combos = linear_relations(&second);
    let candidates: Vec<ExactPoly> = combos.iter().map(|c| combine(k2, c, n)).collect();
    let reduced = echelon_polys(&candidates, &MonomialBasis::new(n, d));
    for a in reduced {
        let b = d1.apply(&a);
        if !b.is_zero() {
            return ConditionII::WitnessFound { a, b };
        }
    }
    ConditionII::NotEstablished
}

/// Basis of `{c : Σ c_k · polys[k] = 0}`.
pub(crate) fn linear_relations(polys: &[ExactPoly]) -> Vec<Vec<GaussRat>> {
    let mut rows: BTreeMap<Exponent, Vec<GaussRat>> = BTreeMap::new();
    for (col, p) in polys.iter().enumerate() {
        for (e, c) in p.terms() {
            rows.entry(e.clone()).or_insert_with(|| vec![GaussRat::zero(); polys.len()])[col] = c.clone();
        }
    }
    let matrix: Vec<Vec<GaussRat>> = rows.into_values().collect();
    linalg::nullspace(&matrix, polys.len())
}

/// `Σ coeffs[k] · polys[k]`.
pub(crate) fn combine(polys: &[ExactPoly], coeffs: &[GaussRat], nvars: usize) -> ExactPoly {
    polys.iter().zip(coeffs).fold(Poly::zero(nvars), |acc, (p, c)| &acc + &p.scale(c))
}

/// Reduced echelon basis of the span of `polys`, with pivots at leading
/// monomials, sorted by increasing leading monomial.
pub(crate) fn echelon_polys(polys: &[ExactPoly], basis: &MonomialBasis) -> Vec<ExactPoly> {
    let m = basis.len();
    let desc: Vec<Vec<GaussRat>> = polys
        .iter()
        .map(|p| {
            let mut v = basis.coordinates(p).expect("polynomial fits the basis");
            v.reverse();
            v
        })
        .collect();
    let mut out: Vec<ExactPoly> = linalg::rref(&desc, m)
        .rows
        .into_iter()
        .map(|mut row| {
            row.reverse();
            basis.poly(&row)
        })
        .collect();
    out.sort_by(|a, b| a.leading_term().map(|t| t.0).cmp(&b.leading_term().map(|t| t.0)));
    out
}

/// How a closure node was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOrigin {
    Generator(usize),
    Bracket(usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureNode {
    pub origin: NodeOrigin,
    pub field: ExactField,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetVerdict {
    pub field: ExactField,
    pub contained: bool,
    /// `(node, coefficient)` pairs with `field = Σ c · node`.
    pub combination: Vec<(usize, GaussRat)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LieClosureCertificate {
    pub schema_version: u32,
    pub nvars: usize,
    pub generators: Vec<ExactField>,
    pub degree_cap: u32,
    pub depth_cap: usize,
    pub depth_reached: usize,
    pub fixpoint: bool,
    pub span_dimension: usize,
    pub ambient_dimension: usize,
    pub discarded_generators: usize,
    pub discarded_brackets: usize,
    pub nodes: Vec<ClosureNode>,
    /// Echelon basis of the span, one field per coordinate vector.
    pub basis: Vec<ExactField>,
    pub targets: Vec<TargetVerdict>,
}

impl LieClosureCertificate {
    pub fn all_targets_contained(&self) -> bool {
        self.targets.iter().all(|t| t.contained)
    }

    /// Rebuilds every node from the generators and re-evaluates each
    /// contained target's combination; returns the number of memberships
    /// replayed.
    pub fn replay(&self) -> Result<usize, ReplayError> {
        let mut rebuilt: Vec<ExactField> = Vec::with_capacity(self.nodes.len());
        for (k, node) in self.nodes.iter().enumerate() {
            let f = match node.origin {
                NodeOrigin::Generator(g) => self
                    .generators
                    .get(g)
                    .cloned()
                    .ok_or_else(|| ReplayError(format!("node {k}: no generator {g}")))?,
                NodeOrigin::Bracket(a, b) => {
                    if a >= k || b >= k {
                        return Err(ReplayError(format!("node {k}: forward reference")));
                    }
                    rebuilt[a].lie_bracket(&rebuilt[b])
                }
            };
            if f != node.field {
                return Err(ReplayError(format!("node {k} does not match its recorded field")));
            }
            rebuilt.push(f);
        }
        let mut count = 0;
        for t in self.targets.iter().filter(|t| t.contained) {
            let mut acc = VectorField::zero(self.nvars);
            for (k, c) in &t.combination {
                let node = rebuilt.get(*k).ok_or_else(|| ReplayError(format!("no node {k}")))?;
                acc = acc.add(&node.scale(c));
            }
            if acc != t.field {
                return Err(ReplayError(format!("target {} does not replay", t.field)));
            }
            count += 1;
        }
        Ok(count)
    }
}

/// Coordinates of vector fields with coefficient degree ≤ D.
pub(crate) struct FieldCoords {
    basis: MonomialBasis,
    nvars: usize,
}

impl FieldCoords {
    pub(crate) fn new(nvars: usize, cap: u32) -> Self {
        FieldCoords { basis: MonomialBasis::new(nvars, cap), nvars }
    }

    pub(crate) fn dim(&self) -> usize {
        self.nvars * self.basis.len()
    }

    pub(crate) fn coords(&self, v: &ExactField) -> Option<Vec<GaussRat>> {
        let m = self.basis.len();
        let mut out = vec![GaussRat::zero(); self.dim()];
        for (i, p) in v.components().iter().enumerate() {
            for (e, c) in p.terms() {
                out[i * m + self.basis.index_of(e)?] = c.clone();
            }
        }
        Some(out)
    }

    pub(crate) fn field(&self, coords: &[GaussRat]) -> ExactField {
        let m = self.basis.len();
        let comps = (0..self.nvars).map(|i| self.basis.poly(&coords[i * m..(i + 1) * m])).collect();
        VectorField::new(comps).expect("consistent nvars")
    }
}

/// Closes the linear span of `generators` under Lie brackets, discarding any
/// field whose coefficient degree exceeds `degree_cap`, for at most
/// `depth_cap` bracket rounds. Each target is then tested for exact
/// membership.
pub fn lie_closure(
    generators: &[ExactField],
    degree_cap: u32,
    depth_cap: usize,
    targets: &[ExactField],
) -> Result<LieClosureCertificate, DensityError> {
    let n = generators.first().or(targets.first()).map_or(0, |g| g.nvars());
    for g in generators.iter().chain(targets) {
        if g.nvars() != n {
            return Err(PolyError::NvarsMismatch { left: n, right: g.nvars() }.into());
        }
    }
    let coords = FieldCoords::new(n, degree_cap);
    let mut tracker = SpanTracker::new(coords.dim());
    let mut nodes: Vec<ClosureNode> = Vec::new();
    let mut discarded_generators = 0;
    let mut discarded_brackets = 0;
    for (k, g) in generators.iter().enumerate() {
        match coords.coords(g) {
            Some(c) => {
                if tracker.insert(&c) {
                    nodes.push(ClosureNode { origin: NodeOrigin::Generator(k), field: g.clone() });
                }
            }
            None => discarded_generators += 1,
        }
    }
    let mut frontier: Vec<usize> = (0..nodes.len()).collect();
    let mut depth_reached = 0;
    while depth_reached < depth_cap && !frontier.is_empty() && !tracker.is_full() {
        depth_reached += 1;
        let old = nodes.len();
        let in_frontier: Vec<bool> = (0..old).map(|k| frontier.binary_search(&k).is_ok()).collect();
        let mut fresh = Vec::new();
        for &b in &frontier {
            for a in 0..old {
                if a == b || (in_frontier[a] && a > b) {
                    continue;
                }
                let br = nodes[a].field.lie_bracket(&nodes[b].field);
                if br.is_zero() {
                    continue;
                }
                let Some(c) = coords.coords(&br) else {
                    discarded_brackets += 1;
                    continue;
                };
                if tracker.insert(&c) {
                    fresh.push(nodes.len());
                    nodes.push(ClosureNode { origin: NodeOrigin::Bracket(a, b), field: br });
                }
            }
        }
        frontier = fresh;
    }
    let fixpoint = frontier.is_empty() || tracker.is_full();
    let targets = targets
        .iter()
        .map(|t| {
            let combo: Option<Combination> = coords.coords(t).and_then(|c| tracker.express(&c));
            match combo {
                Some(c) => TargetVerdict { field: t.clone(), contained: true, combination: c.into_iter().collect() },
                None => TargetVerdict { field: t.clone(), contained: false, combination: Vec::new() },
            }
        })
        .collect();
    Ok(LieClosureCertificate {
        schema_version: SCHEMA_VERSION,
        nvars: n,
        generators: generators.to_vec(),
        degree_cap,
        depth_cap,
        depth_reached,
        fixpoint,
        span_dimension: tracker.rank(),
        ambient_dimension: coords.dim(),
        discarded_generators,
        discarded_brackets,
        nodes,
        basis: tracker.basis().map(|row| coords.field(row)).collect(),
        targets,
    })
}

/// `{f∂ᵢ, xᵢf∂ᵢ}` with `f` running over the monomials free of `xᵢ` of degree ≤ `d`.
pub fn shear_family(nvars: usize, d: u32) -> Vec<ExactField> {
    let basis = MonomialBasis::new(nvars, d);
    let mut out = Vec::new();
    for i in 0..nvars {
        for e in basis.monomials().iter().filter(|e| e.get(i) == 0) {
            let f = Poly::monomial(nvars, e.clone(), GaussRat::one());
            out.push(VectorField::along(nvars, i, f.clone()));
            out.push(VectorField::along(nvars, i, &f * &Poly::var(nvars, i)));
        }
    }
    out
}

/// All fields `x^α ∂ᵢ` with `|α| ≤ d`.
pub fn monomial_fields(nvars: usize, d: u32) -> Vec<ExactField> {
    let basis = MonomialBasis::new(nvars, d);
    (0..nvars)
        .flat_map(|i| {
            basis
                .monomials()
                .iter()
                .map(move |e| VectorField::along(nvars, i, Poly::monomial(nvars, e.clone(), GaussRat::one())))
        })
        .collect()
}

/// Square matrix acting on column vectors.
pub type Matrix = Vec<Vec<GaussRat>>;

/// `w ↦ w + df(w)·ν`.
pub fn isotropy_map(df: &[GaussRat], nu: &[GaussRat]) -> Matrix {
    let m = df.len();
    (0..m)
        .map(|r| {
            (0..m)
                .map(|c| {
                    let id = if r == c { GaussRat::one() } else { GaussRat::zero() };
                    id + nu[r].clone() * df[c].clone()
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSpanReport {
    pub seeds: Vec<Vec<GaussRat>>,
    pub maps_used: usize,
    pub dimension: usize,
    pub ambient_dimension: usize,
    pub full: bool,
    /// Canonical reduced echelon basis of the closure.
    pub basis: Vec<Vec<GaussRat>>,
}

/// Smallest subspace containing `seeds` and invariant under every map.
pub fn orbit_span_closure(seeds: &[Vec<GaussRat>], maps: &[Matrix], dim: usize) -> Result<OrbitSpanReport, DensityError> {
    for v in seeds {
        if v.len() != dim {
            return Err(DensityError::Dimension { expected: dim, got: v.len() });
        }
    }
    for m in maps {
        if m.len() != dim || m.iter().any(|r| r.len() != dim) {
            return Err(DensityError::Dimension { expected: dim, got: m.len() });
        }
    }
    let mut tracker = SpanTracker::new(dim);
    let mut queue: Vec<Vec<GaussRat>> = Vec::new();
    for v in seeds {
        if tracker.insert(v) {
            queue.push(v.clone());
        }
    }
    while let Some(v) = queue.pop() {
        for m in maps {
            let w: Vec<GaussRat> = m
                .iter()
                .map(|row| row.iter().zip(&v).fold(GaussRat::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
                .collect();
            if tracker.insert(&w) {
                queue.push(w);
            }
        }
    }
    Ok(OrbitSpanReport {
        seeds: seeds.to_vec(),
        maps_used: maps.len(),
        dimension: tracker.rank(),
        ambient_dimension: dim,
        full: tracker.is_full(),
        basis: tracker.canonical_basis(),
    })
}

/// Variable index of the matrix entry `c_{row,col}` (zero-based) in ℂ^{n²}.
pub fn matrix_var(n: usize, row: usize, col: usize) -> usize {
    row * n + col
}

/// `det − 1` as a polynomial in the `n²` matrix entries (row-major).
pub fn determinant_poly(n: usize) -> ExactPoly {
    let nv = n * n;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Poly::zero(nv);
    permutations(&mut perm, 0, &mut |p| {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        let mut e = vec![0u32; nv];
        for (r, &c) in p.iter().enumerate() {
            e[matrix_var(n, r, c)] += 1;
        }
        out.add_term(Exponent::new(e), GaussRat::int(sign));
    });
    out
}

fn permutations(v: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// The row-shear pair on `SL_n`: `δ₁(c_{1j}) = c_{nj}`, `δ₂(c_{nj}) = c_{1j}`,
/// all other entries fixed.
pub fn sl_n_derivations(n: usize) -> (ExactField, ExactField) {
    let nv = n * n;
    let mut d1 = VectorField::zero(nv);
    let mut d2 = VectorField::zero(nv);
    for j in 0..n {
        d1 = d1.add(&VectorField::along(nv, matrix_var(n, 0, j), Poly::var(nv, matrix_var(n, n - 1, j))));
        d2 = d2.add(&VectorField::along(nv, matrix_var(n, n - 1, j), Poly::var(nv, matrix_var(n, 0, j))));
    }
    (d1, d2)
}

/// Random exact points of `SL_n ⊂ ℂ^{n²}`, row-major.
///
/// Entries are small random Gaussian rationals; `c₁₁` is then solved for from
/// `det = c₁₁·C₁₁ + R = 1`, retrying whenever the cofactor `C₁₁` vanishes.
pub fn sample_sl_n<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> Result<Vec<Vec<GaussRat>>, DensityError> {
    if n < 2 {
        return Err(DensityError::MatrixTooSmall);
    }
    let budget = 100 * trials.max(1);
    let mut out = Vec::with_capacity(trials);
    let mut attempts = 0;
    while out.len() < trials {
        attempts += 1;
        if attempts > budget {
            return Err(DensityError::SamplingExhausted(budget));
        }
        let mut m: Vec<Vec<GaussRat>> = (0..n).map(|_| (0..n).map(|_| crate::sample::small_gauss(rng)).collect()).collect();
        let minor: Vec<Vec<GaussRat>> = m[1..].iter().map(|r| r[1..].to_vec()).collect();
        let cof = linalg::determinant(&minor);
        let Some(cof_inv) = cof.inv() else { continue };
        m[0][0] = GaussRat::zero();
        let rest = linalg::determinant(&m);
        m[0][0] = (GaussRat::one() - rest) * cof_inv;
        out.push(m.into_iter().flatten().collect());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct VarietyVerdict {
    pub holds_on_samples: bool,
    pub points_tested: usize,
    /// Indices of points where some residual did not vanish.
    pub failures: Vec<usize>,
    pub note: &'static str,
}

const SAMPLE_NOTE: &str = "evaluation at sampled points of the variety; randomized evidence, not a proof";

fn check_points(ideal: &[ExactPoly], points: &[Vec<GaussRat>]) -> Result<(), DensityError> {
    for (k, pt) in points.iter().enumerate() {
        for (g, gen) in ideal.iter().enumerate() {
            let v = gen.evaluate(pt)?;
            if !v.is_zero() {
                return Err(DensityError::OffVariety { point: k, generator: g, value: Box::new(v) });
            }
        }
    }
    Ok(())
}

/// Evaluates each residual at every point; all must vanish.
pub fn verify_polys_on_variety(
    residuals: &[ExactPoly],
    ideal: &[ExactPoly],
    points: &[Vec<GaussRat>],
) -> Result<VarietyVerdict, DensityError> {
    check_points(ideal, points)?;
    let mut failures = Vec::new();
    for (k, pt) in points.iter().enumerate() {
        for r in residuals {
            if !r.evaluate(pt)?.is_zero() {
                failures.push(k);
                break;
            }
        }
    }
    Ok(VarietyVerdict {
        holds_on_samples: failures.is_empty(),
        points_tested: points.len(),
        failures,
        note: SAMPLE_NOTE,
    })
}

/// Componentwise `lhs − rhs = 0` at every sampled point of the variety.
pub fn verify_on_variety(
    lhs: &ExactField,
    rhs: &ExactField,
    ideal: &[ExactPoly],
    points: &[Vec<GaussRat>],
) -> Result<VarietyVerdict, DensityError> {
    if lhs.nvars() != rhs.nvars() {
        return Err(PolyError::NvarsMismatch { left: lhs.nvars(), right: rhs.nvars() }.into());
    }
    let residual = lhs.sub(rhs);
    verify_polys_on_variety(residual.components(), ideal, points)
}

/// A point of the variety where `f` is nonzero, proving `f ≠ 0` in the quotient ring.
pub fn nonvanishing_point(f: &ExactPoly, ideal: &[ExactPoly], points: &[Vec<GaussRat>]) -> Result<Option<usize>, DensityError> {
    check_points(ideal, points)?;
    for (k, pt) in points.iter().enumerate() {
        if !f.evaluate(pt)?.is_zero() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct SlCheck {
    pub name: String,
    pub verdict: VarietyVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlDemoReport {
    pub schema_version: u32,
    pub n: usize,
    pub seed: u64,
    pub points: usize,
    pub delta1: ExactField,
    pub delta2: ExactField,
    pub witness_a: ExactPoly,
    pub witness_b: ExactPoly,
    pub checks: Vec<SlCheck>,
    /// First sampled point where `b` is nonzero, if any.
    pub b_nonzero_at: Option<usize>,
}

impl SlDemoReport {
    pub fn holds(&self) -> bool {
        self.b_nonzero_at.is_some() && self.checks.iter().all(|c| c.verdict.holds_on_samples)
    }
}

/// Tangency of the row-shear pair to `SL_n` and the degree-one witness
/// `a = c₁₁`, `b = δ₁(a) = c_{n1}`, tested at sampled determinant-one points.
pub fn sl_demo(n: usize, trials: usize, seed: u64) -> Result<SlDemoReport, DensityError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let points = sample_sl_n(n, trials, &mut rng)?;
    let nv = n * n;
    let ideal = vec![&determinant_poly(n) - &Poly::one(nv)];
    let det = determinant_poly(n);
    let (d1, d2) = sl_n_derivations(n);
    let a = Poly::var(nv, matrix_var(n, 0, 0));
    let b = d1.apply(&a);
    let mut checks = Vec::new();
    let mut push = |name: &str, r: Vec<ExactPoly>| -> Result<(), DensityError> {
        checks.push(SlCheck { name: name.into(), verdict: verify_polys_on_variety(&r, &ideal, &points)? });
        Ok(())
    };
    push("delta1(det) = 0", vec![d1.apply(&det)])?;
    push("delta2(det) = 0", vec![d2.apply(&det)])?;
    push("delta2(a) = 0", vec![d2.apply(&a)])?;
    push("delta1(b) = 0", vec![d1.apply(&b)])?;
    let b_nonzero_at = nonvanishing_point(&b, &ideal, &points)?;
    Ok(SlDemoReport {
        schema_version: SCHEMA_VERSION,
        n,
        seed,
        points: points.len(),
        delta1: d1,
        delta2: d2,
        witness_a: a,
        witness_b: b,
        checks,
        b_nonzero_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_field;
    use crate::poly::{binomial, parse};

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
    fn shear_identity_examples() {
        assert!(verify_shear_identity(&p("x2", 2), &p("x1", 2)).unwrap().holds);
        let r = verify_shear_identity(&p("1", 2), &p("1", 2)).unwrap();
        assert!(r.holds && r.residual.is_zero());
        assert!(verify_shear_identity(&p("x2^3", 3), &p("x1^2 + 1", 3)).unwrap().holds);
        assert!(matches!(
            verify_shear_identity(&p("x1", 2), &p("1", 2)),
            Err(DensityError::Precondition(_))
        ));
    }

    #[test]
    fn compat_identity_examples() {
        let one = p("1", 2);
        let r = verify_compat_identity(&vf("[1; 0]"), &vf("[0; 1]"), &p("x1", 2), &one, &one).unwrap();
        assert!(r.holds);
        let r = verify_compat_identity(&vf("[1; 0]"), &vf("[0; x1]"), &p("x1", 2), &p("x2", 2), &p("x1^2", 2)).unwrap();
        assert!(r.holds);
        let r = verify_compat_identity(&vf("[1; 0]"), &vf("[0; 1]"), &p("x1", 2), &p("0", 2), &p("x1", 2)).unwrap();
        assert!(r.holds && r.lhs.is_zero());
        match verify_compat_identity(&vf("[1; 0]"), &vf("[0; 1]"), &p("x2", 2), &p("x1", 2), &one) {
            Err(DensityError::Precondition(v)) => assert_eq!(v.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coordinate_pair_is_compatible() {
        let v = check_compatibility(&vf("[1; 0]"), &vf("[0; 1]"), 4, &[]).unwrap();
        assert!(matches!(v.condition_i, ConditionI::FullSpanUpToDegree { degree: 4 }));
        match &v.condition_ii {
            ConditionII::WitnessFound { a, b } => {
                assert_eq!(a, &p("x1", 2));
                assert_eq!(b, &p("1", 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(v.replay().unwrap(), binomial(6, 2) + 1);
    }

    #[test]
    fn same_direction_pair_is_not_established() {
        let v = check_compatibility(&vf("[1; 0]"), &vf("[x1; 0]"), 2, &[p("x2", 2)]).unwrap();
        assert!(matches!(v.condition_i, ConditionI::NotEstablished));
        assert!(matches!(v.condition_ii, ConditionII::NotEstablished));
    }

    #[test]
    fn diagonal_second_field_is_not_established() {
        let v = check_compatibility(&vf("[0; 1]"), &vf("[0; x2]"), 3, &[]).unwrap();
        assert!(matches!(v.condition_i, ConditionI::NotEstablished));
        assert!(matches!(v.condition_ii, ConditionII::NotEstablished));
        assert_eq!(v.product_span_dimension, 4);
    }

    #[test]
    fn candidate_ideal_is_found() {
        // Ker ∂1 = k[x2, x3], Ker(x1∂1 − x3∂3) = k[x2, x1x3]: the products are
        // the monomials whose x3-exponent is at least their x1-exponent.
        let d1 = vf("[1; 0; 0]");
        let d2 = vf("[x1; 0; -x3]");
        let v = check_compatibility(&d1, &d2, 2, &[p("x1", 3), p("x3", 3)]).unwrap();
        match &v.condition_i {
            ConditionI::IdealFoundUpToDegree { h, degree } => {
                assert_eq!(h, &p("x3", 3));
                assert_eq!(*degree, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(v.memberships.len(), 4);
        v.replay().unwrap();
        let v = check_compatibility(&d1, &d2, 4, &[p("x3", 3)]).unwrap();
        assert!(matches!(v.condition_i, ConditionI::NotEstablished));
    }

    #[test]
    fn rejects_non_nilpotent_first_field() {
        assert!(matches!(
            check_compatibility(&vf("[x1; 0]"), &vf("[0; 1]"), 2, &[]),
            Err(DensityError::NotNilpotent)
        ));
        assert!(matches!(
            check_compatibility(&vf("[1; 0]"), &vf("[x2; x1]"), 2, &[]),
            Err(DensityError::NotNilpotentOrDiagonal)
        ));
    }

    #[test]
    fn closure_examples() {
        let c = lie_closure(&[vf("[1; 0]")], 4, 6, &[vf("[x1; 0]")]).unwrap();
        assert_eq!(c.span_dimension, 1);
        assert!(!c.targets[0].contained);
        let c = lie_closure(&[vf("[x2; 0]"), vf("[0; x1]")], 2, 6, &[vf("[x1; -x2]")]).unwrap();
        assert!(c.targets[0].contained);
        assert_eq!(c.span_dimension, 3);
        assert_eq!(c.replay().unwrap(), 1);
    }

    #[test]
    fn shear_family_closure_dimension() {
        for d in 2..=3u32 {
            let c = lie_closure(&shear_family(2, d), d, DEFAULT_DEPTH, &monomial_fields(2, d)).unwrap();
            assert_eq!(c.span_dimension, 2 * binomial(d as usize + 2, 2));
            assert!(c.all_targets_contained());
            c.replay().unwrap();
        }
    }

    #[test]
    fn orbit_examples() {
        let e1 = vec![q(1), q(0)];
        let e2 = vec![q(0), q(1)];
        let shear = isotropy_map(&e2, &e1);
        let r = orbit_span_closure(&[e2.clone()], &[shear.clone()], 2).unwrap();
        assert!(r.full);
        let r = orbit_span_closure(&[e1.clone()], &[], 2).unwrap();
        assert_eq!(r.dimension, 1);
        assert!(!r.full);
        let r = orbit_span_closure(&[e1.clone(), e2.clone()], &[shear.clone()], 2).unwrap();
        assert!(r.full);
        // e1 is fixed by w ↦ w + (e2·w) e1
        let r = orbit_span_closure(&[e1], &[shear], 2).unwrap();
        assert_eq!(r.dimension, 1);
    }

    #[test]
    fn orbit_is_order_independent() {
        let v = vec![q(1), q(1), q(0)];
        let w = vec![q(0), q(0), q(1)];
        let m1 = isotropy_map(&[q(0), q(0), q(1)], &[q(1), q(0), q(0)]);
        let m2 = isotropy_map(&[q(1), q(0), q(0)], &[q(0), q(0), q(1)]);
        let a = orbit_span_closure(&[v.clone(), w.clone()], &[m1.clone(), m2.clone()], 3).unwrap();
        let b = orbit_span_closure(&[w, v], &[m2, m1], 3).unwrap();
        assert_eq!(a.dimension, b.dimension);
        assert_eq!(a.basis, b.basis);
    }

    #[test]
    fn sl_points_have_determinant_one() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let det = determinant_poly(2);
        for pt in sample_sl_n(2, 20, &mut rng).unwrap() {
            assert_eq!(det.evaluate(&pt).unwrap(), q(1));
        }
        let id3: Vec<GaussRat> = (0..9).map(|k| if k % 4 == 0 { q(1) } else { q(0) }).collect();
        assert_eq!(determinant_poly(3).evaluate(&id3).unwrap(), q(1));
        let pts = sample_sl_n(3, 100, &mut rng).unwrap();
        let det3 = &determinant_poly(3) - &Poly::one(9);
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|pt| det3.evaluate(pt).unwrap().is_zero()));
        assert!(matches!(sample_sl_n(1, 1, &mut rng), Err(DensityError::MatrixTooSmall)));
    }

    #[test]
    fn variety_checks() {
        let r = sl_demo(2, 50, 11).unwrap();
        assert!(r.holds());
        let (d1, _) = sl_n_derivations(2);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pts = sample_sl_n(2, 50, &mut rng).unwrap();
        let ideal = vec![&determinant_poly(2) - &Poly::one(4)];
        assert!(verify_on_variety(&d1, &d1, &ideal, &pts).unwrap().holds_on_samples);
        let bumped = d1.add(&VectorField::along(4, 3, p("x1", 4)));
        let v = verify_on_variety(&d1, &bumped, &ideal, &pts).unwrap();
        assert!(!v.holds_on_samples);
        let off = vec![vec![q(1), q(1), q(1), q(1)]];
        assert!(matches!(verify_on_variety(&d1, &d1, &ideal, &off), Err(DensityError::OffVariety { .. })));
    }
}
