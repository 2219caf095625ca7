//! Complete fields vanishing on an algebraic subset of codimension at least
//! two, and the bracket identities that turn them into module generators.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{
    combine, echelon_polys, lie_closure, linear_relations, IdentityCheck, LieClosureCertificate, ReplayError,
    SCHEMA_VERSION,
};
use crate::field::{kernel_basis, ExactField, VectorField};
use crate::linalg::{self, SpanTracker};
use crate::poly::{parse, Exponent, ExactPoly, MonomialBasis, ParseError, Poly, PolyError};
use crate::scalar::GaussRat;

#[derive(Debug, Error)]
pub enum SubvarietyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("generator {index}: {source}")]
    Parse { index: usize, source: ParseError },
    #[error("direction must be a nonzero vector of length {0}")]
    BadDirection(usize),
    #[error("h must be nonzero")]
    ZeroH,
    #[error("h is not constant along the direction")]
    NotConstantAlongDirection,
    #[error("h is not in the ideal span at degree {0}")]
    NotInIdealSpan(u32),
    #[error("precondition violated: {}", .0.join("; "))]
    Precondition(Vec<String>),
    #[error("need two coordinate directions with nonempty elimination at degree {degree}, found {found}")]
    TooFewDirections { degree: u32, found: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Density(#[from] crate::density::DensityError),
}

/// Generators of the defining ideal of `X ⊂ ℂⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInput")]
pub struct SubvarietyInput {
    pub nvars: usize,
    pub generators: Vec<ExactPoly>,
}

#[derive(Deserialize)]
struct RawInput {
    nvars: usize,
    generators: Vec<String>,
}

impl TryFrom<RawInput> for SubvarietyInput {
    type Error = SubvarietyError;

    fn try_from(raw: RawInput) -> Result<Self, Self::Error> {
        let gens = raw
            .generators
            .iter()
            .enumerate()
            .map(|(index, s)| parse(s, raw.nvars).map_err(|source| SubvarietyError::Parse { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        SubvarietyInput::new(raw.nvars, gens)
    }
}

impl SubvarietyInput {
    pub fn new(nvars: usize, generators: Vec<ExactPoly>) -> Result<Self, SubvarietyError> {
        if nvars < 2 {
            return Err(SubvarietyError::InvalidInput("need at least two variables".into()));
        }
        for (k, g) in generators.iter().enumerate() {
            if g.nvars() != nvars {
                return Err(PolyError::NvarsMismatch { left: nvars, right: g.nvars() }.into());
            }
            if g.is_zero() {
                return Err(SubvarietyError::InvalidInput(format!("generator {k} is zero")));
            }
        }
        Ok(SubvarietyInput { nvars, generators })
    }

    /// The same subset in coordinates `y` with `x = A·y`.
    pub fn change_coordinates(&self, a: &[Vec<GaussRat>]) -> Result<Self, SubvarietyError> {
        let n = self.nvars;
        if a.len() != n || a.iter().any(|r| r.len() != n) || linalg::inverse(a).is_none() {
            return Err(SubvarietyError::InvalidInput("coordinate change must be an invertible n×n matrix".into()));
        }
        let subs = linear_substitution(a, n);
        let gens = self.generators.iter().map(|g| g.substitute(&subs)).collect::<Result<_, _>>()?;
        SubvarietyInput::new(n, gens)
    }

    /// Every `m·gᵢ` of degree ≤ `d`, tagged with `(m, i)`.
    fn truncated_span(&self, d: u32) -> Vec<(Exponent, usize, ExactPoly)> {
        let mut out = Vec::new();
        for (k, g) in self.generators.iter().enumerate() {
            if g.degree() > d as i64 {
                continue;
            }
            for m in MonomialBasis::new(self.nvars, d - g.degree() as u32).monomials() {
                out.push((m.clone(), k, g.mul_monomial(m, &GaussRat::one())));
            }
        }
        out
    }

    /// Expresses `target` as `Σ c · m · gᵢ` with every product of degree ≤ `d`.
    pub fn ideal_membership(&self, target: &ExactPoly, d: u32) -> Option<IdealMembership> {
        let basis = MonomialBasis::new(self.nvars, d);
        let coords = basis.coordinates(target)?;
        let span = self.truncated_span(d);
        let mut tracker = SpanTracker::new(basis.len());
        let mut accepted = Vec::new();
        for (k, (_, _, p)) in span.iter().enumerate() {
            if tracker.insert(&basis.coordinates(p).expect("degree bounded")) {
                accepted.push(k);
            }
        }
        let combo = tracker.express(&coords)?;
        Some(IdealMembership {
            target: target.clone(),
            degree: d,
            combination: combo
                .into_iter()
                .map(|(k, c)| {
                    let (m, g, _) = &span[accepted[k]];
                    (m.clone(), *g, c)
                })
                .collect(),
        })
    }
}

fn linear_substitution(a: &[Vec<GaussRat>], n: usize) -> Vec<ExactPoly> {
    (0..n)
        .map(|i| {
            (0..n).fold(Poly::zero(n), |acc, j| &acc + &Poly::var(n, j).scale(&a[i][j]))
        })
        .collect()
}

/// `target = Σ c · m · generators[i]`, recorded as `(m, i, c)`.
#[derive(Debug, Clone, Serialize)]
pub struct IdealMembership {
    pub target: ExactPoly,
    pub degree: u32,
    pub combination: Vec<(Exponent, usize, GaussRat)>,
}

impl IdealMembership {
    pub fn replay(&self, input: &SubvarietyInput) -> Result<(), ReplayError> {
        let mut acc = Poly::zero(input.nvars);
        for (m, g, c) in &self.combination {
            let gen = input.generators.get(*g).ok_or_else(|| ReplayError(format!("no generator {g}")))?;
            if m.degree() as i64 + gen.degree() > self.degree as i64 {
                return Err(ReplayError("product exceeds the degree bound".into()));
            }
            acc = &acc + &gen.mul_monomial(m, c);
        }
        if acc == self.target {
            Ok(())
        } else {
            Err(ReplayError(format!("combination does not reproduce {}", self.target)))
        }
    }
}

/// Polynomials constant along a direction that lie in the truncated ideal span.
#[derive(Debug, Clone, Serialize)]
pub struct Elimination {
    pub direction: Vec<GaussRat>,
    pub degree: u32,
    /// Echelon basis, increasing leading monomial.
    pub polys: Vec<ExactPoly>,
    pub memberships: Vec<IdealMembership>,
}

fn check_direction(nu: &[GaussRat], n: usize) -> Result<(), SubvarietyError> {
    if nu.len() != n || nu.iter().all(|c| c.is_zero()) {
        Err(SubvarietyError::BadDirection(n))
    } else {
        Ok(())
    }
}

/// Basis of `{g : deg g ≤ d, D_ν g = 0, g ∈ span{m·gᵢ : deg ≤ d}}`.
pub fn eliminate_direction(input: &SubvarietyInput, nu: &[GaussRat], d: u32) -> Result<Elimination, SubvarietyError> {
    let n = input.nvars;
    check_direction(nu, n)?;
    let kernel = kernel_basis(&VectorField::constant(nu), d);
    let span: Vec<ExactPoly> = input.truncated_span(d).into_iter().map(|(_, _, p)| p).collect();
    let mut all = kernel.clone();
    all.extend(span);
    let from_kernel: Vec<ExactPoly> = linear_relations(&all)
        .iter()
        .map(|c| combine(&kernel, &c[..kernel.len()], n))
        .filter(|p| !p.is_zero())
        .collect();
    let polys = echelon_polys(&from_kernel, &MonomialBasis::new(n, d));
    let memberships = polys
        .iter()
        .map(|g| input.ideal_membership(g, d).expect("element of the intersection"))
        .collect();
    Ok(Elimination { direction: nu.to_vec(), degree: d, polys, memberships })
}

/// The field `(h∘p)·ν` for `h` vanishing on the projection of `X` along `ν`.
#[derive(Debug, Clone, Serialize)]
pub struct VanishingShear {
    pub direction: Vec<GaussRat>,
    /// `n − 1` independent linear forms annihilating `ν`.
    pub projection: Vec<ExactPoly>,
    /// `h` in the projected coordinates `y_k = projection[k]`.
    pub h_projected: ExactPoly,
    /// `h∘p` on ℂⁿ.
    pub h: ExactPoly,
    pub field: ExactField,
    pub membership: IdealMembership,
}

/// Assembles `h·ν` and re-verifies constancy along `ν` and ideal membership
/// at degree `deg h`.
pub fn build_vanishing_shear(
    input: &SubvarietyInput,
    nu: &[GaussRat],
    h: &ExactPoly,
) -> Result<VanishingShear, SubvarietyError> {
    let n = input.nvars;
    check_direction(nu, n)?;
    if h.nvars() != n {
        return Err(PolyError::NvarsMismatch { left: n, right: h.nvars() }.into());
    }
    if h.is_zero() {
        return Err(SubvarietyError::ZeroH);
    }
    let dnu = VectorField::constant(nu);
    if !dnu.apply(h).is_zero() {
        return Err(SubvarietyError::NotConstantAlongDirection);
    }
    let degree = h.degree() as u32;
    let membership = input.ideal_membership(h, degree).ok_or(SubvarietyError::NotInIdealSpan(degree))?;

    let projection: Vec<ExactPoly> = kernel_basis(&dnu, 1).into_iter().filter(|p| !p.is_constant()).collect();
    debug_assert_eq!(projection.len(), n - 1);
    let pivot = nu.iter().position(|c| !c.is_zero()).expect("nonzero direction");
    let mut rows: Vec<Vec<GaussRat>> = projection
        .iter()
        .map(|l| (0..n).map(|j| l.coeff(&Exponent::unit(n, j))).collect())
        .collect();
    rows.push((0..n).map(|j| if j == pivot { GaussRat::one() } else { GaussRat::zero() }).collect());
    let inv = linalg::inverse(&rows).expect("forms complete to a basis");
    let in_y = h.substitute(&linear_substitution(&inv, n))?;
    debug_assert!(!in_y.depends_on(n - 1));
    let h_projected = Poly::from_terms(
        n - 1,
        in_y.terms().map(|(e, c)| (Exponent::new(e.as_slice()[..n - 1].to_vec()), c.clone())),
    );
    let field = VectorField::constant(nu).mul_poly(h);
    Ok(VanishingShear { direction: nu.to_vec(), projection, h_projected, h: h.clone(), field, membership })
}

/// `[f₁h₁∂₁, x₁f₂h₂∂₂] − [x₁f₁h₁∂₁, f₂h₂∂₂] = f₁f₂h₁h₂∂₂`.
pub fn verify_codim2_identity(
    f1: &ExactPoly,
    h1: &ExactPoly,
    f2: &ExactPoly,
    h2: &ExactPoly,
) -> Result<IdentityCheck, SubvarietyError> {
    let n = f1.nvars();
    for p in [h1, f2, h2] {
        if p.nvars() != n {
            return Err(PolyError::NvarsMismatch { left: n, right: p.nvars() }.into());
        }
    }
    if n < 2 {
        return Err(SubvarietyError::Precondition(vec!["need at least two variables".into()]));
    }
    let mut bad = Vec::new();
    for (name, p, var) in [("f1", f1, 0), ("h1", h1, 0), ("f2", f2, 1), ("h2", h2, 1)] {
        if p.depends_on(var) {
            bad.push(format!("{name} depends on x{}", var + 1));
        }
    }
    if !bad.is_empty() {
        return Err(SubvarietyError::Precondition(bad));
    }
    let x1 = Poly::var(n, 0);
    let a = VectorField::along(n, 0, f1 * h1);
    let b = VectorField::along(n, 1, f2 * h2);
    let lhs = a.lie_bracket(&b.mul_poly(&x1)).sub(&a.mul_poly(&x1).lie_bracket(&b));
    let rhs = VectorField::along(n, 1, &(f1 * f2) * &(h1 * h2));
    Ok(IdentityCheck::new(lhs, rhs))
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedCheck {
    pub name: &'static str,
    pub check: IdentityCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalIdentities {
    pub nu1: ExactField,
    pub nu2: ExactField,
    pub xi: ExactPoly,
    pub checks: Vec<NamedCheck>,
}

impl LocalIdentities {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.check.holds)
    }
}

/// With `ν₁ = ∂₁`, `ν₂ = hˢ∂₂ + (∂r/∂x₂)∂₁` and `ξ = hˢx₁ − r`, checks
///
/// * `[fν₁, ξgν₁] = hˢfgν₁`
/// * `[ξν₂, x₂ξν₁] − [x₂ξν₂, ξν₁] = hˢξ²ν₁`
/// * `[ξν₂, x₂fν₁] − [x₂ξν₂, fν₁] = hˢξfν₁`
pub fn verify_local_identities(
    r: &ExactPoly,
    h: &ExactPoly,
    s: u32,
    f: &ExactPoly,
    g: &ExactPoly,
) -> Result<LocalIdentities, SubvarietyError> {
    let n = r.nvars();
    for p in [h, f, g] {
        if p.nvars() != n {
            return Err(PolyError::NvarsMismatch { left: n, right: p.nvars() }.into());
        }
    }
    if n < 2 {
        return Err(SubvarietyError::Precondition(vec!["need at least two variables".into()]));
    }
    let mut bad = Vec::new();
    if r.depends_on(0) {
        bad.push("r depends on x1".to_string());
    }
    if h.depends_on(0) || h.depends_on(1) {
        bad.push("h depends on x1 or x2".to_string());
    }
    if h.is_zero() {
        bad.push("h is zero".to_string());
    }
    if f.depends_on(0) {
        bad.push("f depends on x1".to_string());
    }
    if g.depends_on(0) {
        bad.push("g depends on x1".to_string());
    }
    if !bad.is_empty() {
        return Err(SubvarietyError::Precondition(bad));
    }
    let hs = h.pow(s);
    let x1 = Poly::var(n, 0);
    let x2 = Poly::var(n, 1);
    let nu1: ExactField = VectorField::coordinate(n, 0);
    let nu2 = VectorField::along(n, 1, hs.clone()).add(&VectorField::along(n, 0, r.partial_derivative(1)));
    let xi = &(&hs * &x1) - r;
    let x2xi = &x2 * &xi;

    let first = IdentityCheck::new(
        nu1.mul_poly(f).lie_bracket(&nu1.mul_poly(&(&xi * g))),
        nu1.mul_poly(&(&(&hs * f) * g)),
    );
    let second = IdentityCheck::new(
        nu2.mul_poly(&xi)
            .lie_bracket(&nu1.mul_poly(&x2xi))
            .sub(&nu2.mul_poly(&x2xi).lie_bracket(&nu1.mul_poly(&xi))),
        nu1.mul_poly(&(&hs * &(&xi * &xi))),
    );
    let third = IdentityCheck::new(
        nu2.mul_poly(&xi)
            .lie_bracket(&nu1.mul_poly(&(&x2 * f)))
            .sub(&nu2.mul_poly(&x2xi).lie_bracket(&nu1.mul_poly(f))),
        nu1.mul_poly(&(&(&hs * &xi) * f)),
    );
    Ok(LocalIdentities {
        nu1,
        nu2,
        xi,
        checks: vec![
            NamedCheck { name: "[f nu1, xi g nu1] = h^s f g nu1", check: first },
            NamedCheck { name: "[xi nu2, x2 xi nu1] - [x2 xi nu2, xi nu1] = h^s xi^2 nu1", check: second },
            NamedCheck { name: "[xi nu2, x2 f nu1] - [x2 xi nu2, f nu1] = h^s xi f nu1", check: third },
        ],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Codim2Certificate {
    pub schema_version: u32,
    pub input: SubvarietyInput,
    pub degree: u32,
    pub coefficient_cap: u32,
    /// Zero-based coordinate directions used.
    pub directions: [usize; 2],
    pub h: [ExactPoly; 2],
    pub h_memberships: Vec<IdealMembership>,
    pub closure: LieClosureCertificate,
}

impl Codim2Certificate {
    pub fn all_targets_established(&self) -> bool {
        self.closure.all_targets_contained()
    }

    pub fn replay(&self) -> Result<usize, ReplayError> {
        for m in &self.h_memberships {
            m.replay(&self.input)?;
        }
        self.closure.replay()
    }
}

/// Closure of `{f·hᵢ·∂ᵢ, x_j·f·hᵢ·∂ᵢ}` over the first two coordinate
/// directions `i` with nonempty elimination at degree `d`, where `j` runs over
/// both directions and `f` over monomials free of `xᵢ`; fields with
/// coefficient degree above `cap` are dropped. Targets are `m·h₁h₂·∂ᵢ` of
/// coefficient degree ≤ `d` along both directions.
pub fn codim2_module_certificate(
    input: &SubvarietyInput,
    d: u32,
    cap: u32,
) -> Result<Codim2Certificate, SubvarietyError> {
    let n = input.nvars;
    let mut chosen: Vec<(usize, ExactPoly, IdealMembership)> = Vec::new();
    for i in 0..n {
        if chosen.len() == 2 {
            break;
        }
        let nu: Vec<GaussRat> = (0..n).map(|k| if k == i { GaussRat::one() } else { GaussRat::zero() }).collect();
        let mut elim = eliminate_direction(input, &nu, d)?;
        if !elim.polys.is_empty() {
            chosen.push((i, elim.polys.swap_remove(0), elim.memberships.swap_remove(0)));
        }
    }
    if chosen.len() < 2 {
        return Err(SubvarietyError::TooFewDirections { degree: d, found: chosen.len() });
    }
    let dirs = [chosen[0].0, chosen[1].0];
    let hs = [chosen[0].1.clone(), chosen[1].1.clone()];
    let mut generators = Vec::new();
    for (i, h) in dirs.iter().zip(&hs) {
        let room = cap as i64 - h.degree();
        if room < 0 {
            continue;
        }
        for e in MonomialBasis::new(n, room as u32).monomials().iter().filter(|e| e.get(*i) == 0) {
            let fh = h.mul_monomial(e, &GaussRat::one());
            generators.push(VectorField::along(n, *i, fh.clone()));
            for j in dirs {
                if fh.degree() < cap as i64 {
                    generators.push(VectorField::along(n, *i, &fh * &Poly::var(n, j)));
                }
            }
        }
    }
    let h12 = &hs[0] * &hs[1];
    let mut targets = Vec::new();
    if h12.degree() <= d as i64 {
        for i in dirs {
            for m in MonomialBasis::new(n, d - h12.degree() as u32).monomials() {
                targets.push(VectorField::along(n, i, h12.mul_monomial(m, &GaussRat::one())));
            }
        }
    }
    let closure = lie_closure(&generators, cap, crate::density::DEFAULT_DEPTH, &targets)?;
    Ok(Codim2Certificate {
        schema_version: SCHEMA_VERSION,
        input: input.clone(),
        degree: d,
        coefficient_cap: cap,
        directions: dirs,
        h: hs,
        h_memberships: chosen.into_iter().map(|c| c.2).collect(),
        closure,
    })
}
