//! Seeded random instances: polynomials, points and small Gaussian rationals.

use rand::Rng;

use crate::poly::{Exponent, ExactPoly, Poly};
use crate::scalar::GaussRat;

/// Fixed default seed for every randomized procedure.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Small Gaussian rational `a/b + c·i` with `|a|, |c| ≤ 3`, `1 ≤ b ≤ 3`.
pub fn small_gauss<R: Rng + ?Sized>(rng: &mut R) -> GaussRat {
    let re = GaussRat::ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3));
    let im = if rng.gen_bool(0.3) { GaussRat::int(rng.gen_range(-2..=2)) * GaussRat::i() } else { GaussRat::int(0) };
    re + im
}

pub fn nonzero_small_gauss<R: Rng + ?Sized>(rng: &mut R) -> GaussRat {
    loop {
        let c = small_gauss(rng);
        if c != GaussRat::int(0) {
            return c;
        }
    }
}

/// Random polynomial in `nvars` variables of degree ≤ `max_deg` whose terms
/// only involve `allowed` variables (zero-based), with up to `max_terms` terms.
pub fn random_poly<R: Rng + ?Sized>(
    rng: &mut R,
    nvars: usize,
    max_deg: u32,
    allowed: &[usize],
    max_terms: usize,
) -> ExactPoly {
    let mut p = Poly::zero(nvars);
    let nterms = rng.gen_range(1..=max_terms.max(1));
    for _ in 0..nterms {
        let mut e = vec![0u32; nvars];
        if !allowed.is_empty() {
            let deg = rng.gen_range(0..=max_deg);
            for _ in 0..deg {
                e[allowed[rng.gen_range(0..allowed.len())]] += 1;
            }
        }
        p.add_term(Exponent::new(e), nonzero_small_gauss(rng));
    }
    p
}

/// Random field with components of degree ≤ `max_deg`.
pub fn random_field<R: Rng + ?Sized>(rng: &mut R, nvars: usize, max_deg: u32, max_terms: usize) -> crate::field::ExactField {
    let all: Vec<usize> = (0..nvars).collect();
    let comps = (0..nvars).map(|_| random_poly(rng, nvars, max_deg, &all, max_terms)).collect();
    crate::field::VectorField::new(comps).expect("consistent nvars")
}

pub fn random_point<R: Rng + ?Sized>(rng: &mut R, nvars: usize) -> Vec<GaussRat> {
    (0..nvars).map(|_| small_gauss(rng)).collect()
}
