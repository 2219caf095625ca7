//! Exact linear algebra over ℚ(i).
//!
//! [`rref`] eliminates fraction-free over the Gaussian integers (Bareiss
//! update with exact division by the previous pivot) and only passes to
//! fractions for the final normalization. [`SpanTracker`] maintains an
//! incremental echelon basis that remembers how each basis row was built from
//! the inserted vectors, so memberships can be replayed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{GaussRat, Scalar};

/// Gaussian integer used during the fraction-free phase.
#[derive(Clone, Debug, PartialEq, Eq)]
struct GaussInt {
    re: BigInt,
    im: BigInt,
}

impl GaussInt {
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn sub(&self, o: &GaussInt) -> GaussInt {
        GaussInt { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    /// Exact quotient; the Bareiss invariant guarantees divisibility.
    fn div_exact(&self, d: &GaussInt) -> GaussInt {
        let n = &d.re * &d.re + &d.im * &d.im;
        let re = &self.re * &d.re + &self.im * &d.im;
        let im = &self.im * &d.re - &self.re * &d.im;
        let (qr, rr) = re.div_rem(&n);
        let (qi, ri) = im.div_rem(&n);
        debug_assert!(rr.is_zero() && ri.is_zero(), "inexact Bareiss division");
        GaussInt { re: qr, im: qi }
    }

    fn to_rat(&self) -> GaussRat {
        GaussRat::new(
            BigRational::from_integer(self.re.clone()),
            BigRational::from_integer(self.im.clone()),
        )
    }
}

fn integer_row(row: &[GaussRat]) -> Vec<GaussInt> {
    let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.denom_lcm()));
    let lq = BigRational::from_integer(l);
    row.iter()
        .map(|c| {
            let re = &c.re * &lq;
            let im = &c.im * &lq;
            GaussInt { re: re.to_integer(), im: im.to_integer() }
        })
        .collect()
}

/// Reduced row echelon form: pivot entries are 1 and pivot columns are zero
/// in every other row.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rows: Vec<Vec<GaussRat>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Null-space basis: one vector per free column, with a 1 there and zeros
    /// in the other free columns.
    pub fn nullspace(&self) -> Vec<Vec<GaussRat>> {
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.ncols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![GaussRat::zero(); self.ncols];
                v[free] = GaussRat::one();
                for (r, &p) in self.pivots.iter().enumerate() {
                    let e = &self.rows[r][free];
                    if !e.is_zero() {
                        v[p] = -e.clone();
                    }
                }
                v
            })
            .collect()
    }
}

pub fn rref(matrix: &[Vec<GaussRat>], ncols: usize) -> Rref {
    let mut a: Vec<Vec<GaussInt>> = matrix.iter().map(|r| integer_row(r)).collect();
    let m = a.len();
    let mut pivots = Vec::new();
    let mut prev = GaussInt { re: BigInt::one(), im: BigInt::zero() };
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let Some(sel) = (r..m).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, sel);
        let piv = a[r][c].clone();
        for i in r + 1..m {
            let factor = a[i][c].clone();
            for j in c..ncols {
                let v = piv.mul(&a[i][j]).sub(&factor.mul(&a[r][j]));
                a[i][j] = v.div_exact(&prev);
            }
        }
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    let mut rows: Vec<Vec<GaussRat>> = a[..r]
        .iter()
        .map(|row| row.iter().map(GaussInt::to_rat).collect())
        .collect();
    for (k, &p) in pivots.iter().enumerate() {
        let inv = rows[k][p].inv().expect("nonzero pivot");
        rows[k] = rows[k].iter().map(|x| x.clone() * inv.clone()).collect();
    }
    for k in (0..pivots.len()).rev() {
        let p = pivots[k];
        for i in 0..k {
            let f = rows[i][p].clone();
            if f.is_zero() {
                continue;
            }
            for j in p..ncols {
                let v = rows[i][j].clone() - f.clone() * rows[k][j].clone();
                rows[i][j] = v;
            }
        }
    }
    Rref { rows, pivots, ncols }
}

/// Null space of the `m × ncols` matrix.
pub fn nullspace(matrix: &[Vec<GaussRat>], ncols: usize) -> Vec<Vec<GaussRat>> {
    rref(matrix, ncols).nullspace()
}

pub fn rank(matrix: &[Vec<GaussRat>], ncols: usize) -> usize {
    rref(matrix, ncols).rank()
}

/// Determinant of a square matrix by fraction-free elimination.
pub fn determinant(matrix: &[Vec<GaussRat>]) -> GaussRat {
    let n = matrix.len();
    let mut scale = GaussRat::one();
    let mut a: Vec<Vec<GaussInt>> = matrix
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.denom_lcm()));
            scale = scale.clone() * GaussRat::real(BigRational::from_integer(l));
            integer_row(r)
        })
        .collect();
    let mut sign = GaussRat::one();
    let mut prev = GaussInt { re: BigInt::one(), im: BigInt::zero() };
    for c in 0..n {
        let Some(sel) = (c..n).find(|&i| !a[i][c].is_zero()) else { return GaussRat::zero() };
        if sel != c {
            a.swap(c, sel);
            sign = -sign;
        }
        let piv = a[c][c].clone();
        for i in c + 1..n {
            let factor = a[i][c].clone();
            for j in c..n {
                let v = piv.mul(&a[i][j]).sub(&factor.mul(&a[c][j]));
                a[i][j] = v.div_exact(&prev);
            }
        }
        prev = piv;
    }
    if n == 0 {
        return GaussRat::one();
    }
    sign * a[n - 1][n - 1].to_rat() * scale.inv().expect("nonzero scale")
}

/// Inverse of a square matrix, or `None` when it is singular.
pub fn inverse(matrix: &[Vec<GaussRat>]) -> Option<Vec<Vec<GaussRat>>> {
    let n = matrix.len();
    let augmented: Vec<Vec<GaussRat>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { GaussRat::one() } else { GaussRat::zero() }));
            r
        })
        .collect();
    let r = rref(&augmented, 2 * n);
    if r.pivots.len() != n || r.pivots.iter().enumerate().any(|(k, &p)| k != p) {
        return None;
    }
    Some(r.rows.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Sparse linear combination keyed by input index.
pub type Combination = BTreeMap<usize, GaussRat>;

#[derive(Clone, Debug)]
struct TrackedRow {
    pivot: usize,
    vec: Vec<GaussRat>,
    combo: Combination,
}

/// Incremental echelon basis with provenance.
///
/// Every row is `Σ combo[k] · input_k` where `input_k` is the `k`-th vector
/// accepted by [`SpanTracker::insert`] (rejected, dependent vectors do not
/// get an index). Rows are normalized so the pivot entry is 1 and each row
/// vanishes at the pivots of earlier rows.
#[derive(Clone, Debug)]
pub struct SpanTracker {
    dim: usize,
    rows: Vec<TrackedRow>,
}

impl SpanTracker {
    pub fn new(dim: usize) -> Self {
        SpanTracker { dim, rows: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    fn reduce(&self, v: &[GaussRat]) -> (Vec<GaussRat>, Combination) {
        assert_eq!(v.len(), self.dim);
        let mut v = v.to_vec();
        let mut combo = Combination::new();
        for row in &self.rows {
            let f = v[row.pivot].clone();
            if f.is_zero() {
                continue;
            }
            for j in row.pivot..self.dim {
                if !row.vec[j].is_zero() {
                    v[j] = v[j].clone() - f.clone() * row.vec[j].clone();
                }
            }
            for (k, c) in &row.combo {
                add_into(&mut combo, *k, f.clone() * c.clone());
            }
        }
        (v, combo)
    }

    /// Inserts the next input; returns `true` if it enlarged the span.
    pub fn insert(&mut self, v: &[GaussRat]) -> bool {
        let id = self.rows.len();
        let (res, sub) = self.reduce(v);
        let Some(pivot) = res.iter().position(|x| !x.is_zero()) else { return false };
        let inv = res[pivot].inv().expect("nonzero pivot");
        let vec: Vec<GaussRat> = res.into_iter().map(|x| x * inv.clone()).collect();
        let mut combo = Combination::new();
        combo.insert(id, inv.clone());
        for (k, c) in sub {
            add_into(&mut combo, k, -(c * inv.clone()));
        }
        self.rows.push(TrackedRow { pivot, vec, combo });
        true
    }

    pub fn contains(&self, v: &[GaussRat]) -> bool {
        self.reduce(v).0.iter().all(|x| x.is_zero())
    }

    /// If `v` is in the span, its expression in terms of the inputs.
    pub fn express(&self, v: &[GaussRat]) -> Option<Combination> {
        let (res, combo) = self.reduce(v);
        res.iter().all(|x| x.is_zero()).then_some(combo)
    }

    /// Echelon basis rows.
    pub fn basis(&self) -> impl Iterator<Item = &[GaussRat]> {
        self.rows.iter().map(|r| r.vec.as_slice())
    }

    /// Canonical reduced echelon basis, independent of insertion order.
    pub fn canonical_basis(&self) -> Vec<Vec<GaussRat>> {
        let m: Vec<Vec<GaussRat>> = self.rows.iter().map(|r| r.vec.clone()).collect();
        rref(&m, self.dim).rows
    }
}

fn add_into(c: &mut Combination, k: usize, v: GaussRat) {
    if v.is_zero() {
        return;
    }
    match c.remove(&k) {
        Some(old) => {
            let s = old + v;
            if !s.is_zero() {
                c.insert(k, s);
            }
        }
        None => {
            c.insert(k, v);
        }
    }
}
