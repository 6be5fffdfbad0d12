//! Dense complex operators and the small amount of numerical linear algebra
//! the checks need: rank, inversion, nullspaces and span residuals.

use std::ops::Mul;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// A dense complex matrix acting on coefficient columns.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp(DMatrix<C64>);

impl LinOp {
    pub fn new(m: DMatrix<C64>) -> Self {
        LinOp(m)
    }

    pub fn identity(n: usize) -> Self {
        LinOp(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        LinOp(DMatrix::zeros(rows, cols))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        LinOp(DMatrix::from_fn(rows, cols, f))
    }

    /// Permutation-like matrix sending basis vector `j` to `coeff[j] * e_{target[j]}`.
    pub fn monomial(target: &[usize], coeff: impl Fn(usize) -> C64) -> Self {
        let n = target.len();
        let mut m = DMatrix::zeros(n, n);
        for (j, &i) in target.iter().enumerate() {
            m[(i, j)] = coeff(j);
        }
        LinOp(m)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.0.is_square()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        &self.0 * x
    }

    pub fn adjoint(&self) -> LinOp {
        LinOp(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> LinOp {
        LinOp(&self.0 * c)
    }

    pub fn add(&self, other: &LinOp) -> LinOp {
        LinOp(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &LinOp) -> LinOp {
        LinOp(&self.0 - &other.0)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn max_abs_diff(&self, other: &LinOp) -> f64 {
        max_abs(&(&self.0 - &other.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Column-major flattening.
    pub fn to_vec(&self) -> DVector<C64> {
        DVector::from_column_slice(self.0.as_slice())
    }

    pub fn from_vec(v: &DVector<C64>, rows: usize, cols: usize) -> LinOp {
        LinOp(DMatrix::from_column_slice(rows, cols, v.as_slice()))
    }

    pub fn commutator(&self, other: &LinOp) -> LinOp {
        LinOp(&self.0 * &other.0 - &other.0 * &self.0)
    }
}

impl Mul for &LinOp {
    type Output = LinOp;

    fn mul(self, rhs: &LinOp) -> LinOp {
        LinOp(&self.0 * &rhs.0)
    }
}

impl From<DMatrix<C64>> for LinOp {
    fn from(m: DMatrix<C64>) -> Self {
        LinOp(m)
    }
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &DVector<C64>) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank: singular values above `rel * sigma_max`.
pub fn rank(m: &DMatrix<C64>, rel: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel * top).count()
}

/// `sigma_min / sigma_max` of a square matrix; zero for the zero matrix.
pub fn singular_ratio(m: &DMatrix<C64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&top), Some(&bottom)) if top > 0.0 => bottom / top,
        _ => 0.0,
    }
}

pub fn is_invertible(m: &DMatrix<C64>, rel: f64) -> bool {
    m.is_square() && m.nrows() > 0 && singular_ratio(m) > rel
}

/// Inverse of a well-conditioned square matrix.
pub fn inverse(m: &DMatrix<C64>, rel: f64) -> Result<DMatrix<C64>> {
    let ratio = singular_ratio(m);
    if !m.is_square() || ratio <= rel {
        return Err(Error::NotInvertible { ratio });
    }
    m.clone().try_inverse().ok_or(Error::NotInvertible { ratio })
}

/// Orthonormal basis of the nullspace, from right singular vectors whose
/// singular value is at most `rel * max(sigma_max, scale)`. `scale` keeps a
/// matrix made only of round-off from being treated as full rank.
pub fn nullspace(m: &DMatrix<C64>, rel: f64, scale: f64) -> Vec<DVector<C64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // Thin SVD drops right singular vectors when rows < cols; pad with zeros.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let thr = rel * top.max(scale);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= thr)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Orthonormal basis (as columns) for the span of `vectors`.
pub fn orthonormal_span(vectors: &[DVector<C64>], rel: f64) -> DMatrix<C64> {
    let Some(first) = vectors.first() else {
        return DMatrix::zeros(0, 0);
    };
    let dim = first.len();
    let a = DMatrix::from_columns(vectors);
    let svd = a.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().fold(0.0f64, |x, &y| x.max(y));
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| top > 0.0 && s > rel * top)
        .map(|(i, _)| i)
        .collect();
    let mut q = DMatrix::zeros(dim, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        q.set_column(c, &u.column(i));
    }
    q
}

/// `||v - Q Q^* v|| / ||v||` for orthonormal columns `Q`; zero for `v = 0`.
pub fn span_residual(q: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    if q.ncols() == 0 {
        return 1.0;
    }
    let proj = q * (q.adjoint() * v);
    (v - proj).norm() / norm
}
