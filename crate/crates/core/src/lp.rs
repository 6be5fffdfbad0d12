//! Vectors and functionals on `l^p(G)`, the left and right regular
//! representations, the inversion involution `J`, commutants, and
//! classification of `l^p` isometries.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{self, LinOp};
use crate::report::{VerificationReport, Witness};
use crate::sample;
use crate::tolerance::Tolerances;
use crate::C64;

/// Seed for the pseudo-random part of the probe set.
pub const PROBE_SEED: u64 = 0x005e_ed0f_1a7e;
/// Number of pseudo-random probe vectors.
pub const RANDOM_PROBES: usize = 64;
/// Largest group order accepted by the commutant-based checks.
pub const DEFAULT_ORDER_LIMIT: usize = 16;

/// An exponent `p` in `[1, inf)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PNorm(f64);

impl PNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(PNorm(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn two() -> Self {
        PNorm(2.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_two(self) -> bool {
        self.0 == 2.0
    }
}

fn finite(v: &DVector<C64>) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Coefficients of `sum_g x_g delta_g`.
#[derive(Clone, Debug, PartialEq)]
pub struct GVector(DVector<C64>);

impl GVector {
    pub fn new(coeffs: DVector<C64>) -> Result<Self> {
        if finite(&coeffs) {
            Ok(GVector(coeffs))
        } else {
            Err(Error::NonFinite("vector"))
        }
    }

    pub fn from_vec(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(DVector::from_vec(coeffs))
    }

    pub fn zeros(n: usize) -> Self {
        GVector(DVector::zeros(n))
    }

    /// The standard basis vector `delta_i`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        GVector(v)
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn mapped(&self, op: &LinOp) -> GVector {
        GVector(op.apply(&self.0))
    }

    pub fn scale(&self, c: C64) -> GVector {
        GVector(&self.0 * c)
    }
}

/// A linear functional, stored by its values `f(delta_i)`. Evaluation is
/// bilinear: `f(x) = sum_i f_i x_i`, no conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct GFunctional(DVector<C64>);

impl GFunctional {
    pub fn new(coeffs: DVector<C64>) -> Result<Self> {
        if finite(&coeffs) {
            Ok(GFunctional(coeffs))
        } else {
            Err(Error::NonFinite("functional"))
        }
    }

    pub fn from_vec(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(DVector::from_vec(coeffs))
    }

    pub fn zeros(n: usize) -> Self {
        GFunctional(DVector::zeros(n))
    }

    /// The coordinate functional `zeta_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        GFunctional(v)
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn eval(&self, x: &GVector) -> C64 {
        self.eval_raw(x.coeffs())
    }

    pub fn eval_raw(&self, x: &DVector<C64>) -> C64 {
        self.0.iter().zip(x.iter()).map(|(a, b)| a * b).sum()
    }

    /// The functional `x -> f(op x)`.
    pub fn compose(&self, op: &LinOp) -> GFunctional {
        GFunctional(op.matrix().transpose() * &self.0)
    }

    pub fn scale(&self, c: C64) -> GFunctional {
        GFunctional(&self.0 * c)
    }
}

pub fn p_norm_raw(x: &DVector<C64>, p: PNorm) -> f64 {
    let p = p.value();
    if p == 1.0 {
        return x.iter().map(|z| z.norm()).sum();
    }
    if p == 2.0 {
        return x.norm();
    }
    x.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(sum_g |x_g|^p)^(1/p)`.
pub fn p_norm(x: &GVector, p: PNorm) -> f64 {
    p_norm_raw(x.coeffs(), p)
}

/// `lambda_g delta_h = delta_{gh}`.
pub fn left_regular(group: &FiniteGroup, g: usize) -> LinOp {
    let target: Vec<usize> = (0..group.order()).map(|h| group.op(g, h)).collect();
    LinOp::monomial(&target, |_| C64::new(1.0, 0.0))
}

/// `rho_g delta_h = delta_{h g^{-1}}`.
pub fn right_regular(group: &FiniteGroup, g: usize) -> LinOp {
    let gi = group.inv(g);
    let target: Vec<usize> = (0..group.order()).map(|h| group.op(h, gi)).collect();
    LinOp::monomial(&target, |_| C64::new(1.0, 0.0))
}

pub fn left_regular_all(group: &FiniteGroup) -> Vec<LinOp> {
    (0..group.order()).map(|g| left_regular(group, g)).collect()
}

pub fn right_regular_all(group: &FiniteGroup) -> Vec<LinOp> {
    (0..group.order()).map(|g| right_regular(group, g)).collect()
}

/// `J delta_g = delta_{g^{-1}}`.
pub fn j_involution(group: &FiniteGroup) -> LinOp {
    LinOp::monomial(group.inverses(), |_| C64::new(1.0, 0.0))
}

/// `Phi(A) = J A J`.
pub fn phi_conjugate(group: &FiniteGroup, a: &LinOp) -> LinOp {
    let j = j_involution(group);
    &(&j * a) * &j
}

/// Basis of `{T : T A = A T for all A in ops}`.
///
/// Each constraint `T A - A T = 0` is the linear map
/// `A^T (x) I - I (x) A` on column-major `vec(T)`. Blocks are folded into a
/// running `R` factor so the stacked system never exceeds `2 n^2` rows.
pub fn commutant(ops: &[LinOp], rel: f64) -> Result<Vec<LinOp>> {
    let first = ops.first().ok_or(Error::EmptyOperatorList)?;
    let n = first.nrows();
    for op in ops {
        if op.nrows() != n || op.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if op.nrows() != n { op.nrows() } else { op.ncols() },
            });
        }
    }
    let dim = n * n;
    let id = DMatrix::<C64>::identity(n, n);
    let mut r: Option<DMatrix<C64>> = None;
    for op in ops {
        let a = op.matrix();
        let block = a.transpose().kronecker(&id) - id.kronecker(a);
        let stacked = match r.take() {
            None => block,
            Some(prev) => {
                let mut s = DMatrix::zeros(prev.nrows() + dim, dim);
                s.view_mut((0, 0), (prev.nrows(), dim)).copy_from(&prev);
                s.view_mut((prev.nrows(), 0), (dim, dim)).copy_from(&block);
                s
            }
        };
        r = Some(stacked.qr().r());
    }
    let system = r.expect("at least one operator");
    // Each block has norm up to twice the operator's, so its size sets the
    // floor for what counts as a zero singular value.
    let scale = ops.iter().map(LinOp::max_abs).fold(0.0, f64::max) * n as f64;
    Ok(linalg::nullspace(&system, rel, scale)
        .iter()
        .map(|v| LinOp::from_vec(v, n, n))
        .collect())
}

/// Largest relative residual of any element of `members` against `span(basis)`.
pub fn span_containment(basis: &[LinOp], members: &[LinOp], rel: f64) -> f64 {
    let vecs: Vec<DVector<C64>> = basis.iter().map(LinOp::to_vec).collect();
    let q = linalg::orthonormal_span(&vecs, rel);
    members
        .iter()
        .map(|m| {
            if q.nrows() == 0 {
                if m.max_abs() == 0.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                linalg::span_residual(&q, &m.to_vec())
            }
        })
        .fold(0.0, f64::max)
}

/// Two-sided containment residual and dimensions of `span(a)` and `span(b)`.
fn compare_spans(a: &[LinOp], b: &[LinOp], rel: f64) -> (f64, f64) {
    (span_containment(a, b, rel), span_containment(b, a, rel))
}

/// `lambda(G)' = rho(G)''` and `rho(G)' = lambda(G)''`, plus the `J`
/// conjugation map between the two double commutants.
pub fn check_commutation_theorem(group: &FiniteGroup, tol: &Tolerances, order_limit: usize) -> VerificationReport {
    let mut report = VerificationReport::new("commutation-theorem", group.label(), *tol);
    if group.order() > order_limit {
        return report.not_applicable(format!("order {} exceeds limit {order_limit}", group.order()));
    }
    let lambda = left_regular_all(group);
    let rho = right_regular_all(group);
    let compute = |ops: &[LinOp]| commutant(ops, tol.rank).expect("regular operators share a dimension");
    let lambda_c = compute(&lambda);
    let rho_c = compute(&rho);
    let lambda_cc = compute(&lambda_c);
    let rho_cc = compute(&rho_c);

    report.witness("dim-lambda-commutant", Witness::Count(lambda_c.len()));
    report.witness("dim-rho-commutant", Witness::Count(rho_c.len()));
    report.witness("dim-lambda-double-commutant", Witness::Count(lambda_cc.len()));
    report.witness("dim-rho-double-commutant", Witness::Count(rho_cc.len()));

    let thr = tol.residual;
    let (a, b) = compare_spans(&lambda_c, &rho_cc, tol.rank);
    report.bound("lambda-commutant-in-rho-double", a, thr);
    report.bound("rho-double-in-lambda-commutant", b, thr);
    let (a, b) = compare_spans(&rho_c, &lambda_cc, tol.rank);
    report.bound("rho-commutant-in-lambda-double", a, thr);
    report.bound("lambda-double-in-rho-commutant", b, thr);
    if lambda_c.len() != rho_cc.len() || rho_c.len() != lambda_cc.len() {
        report.fail_with("dimension-mismatch", Witness::Flag(true));
    }

    report.push(phi_report(group, &rho_cc, &lambda_cc, tol));
    report
}

/// `Phi(rho_g) = lambda_g` exactly, `Phi` maps `rho(G)''` into `lambda(G)''`,
/// and `Phi` is an involution.
pub fn check_phi_conjugation(group: &FiniteGroup, tol: &Tolerances) -> VerificationReport {
    let rho_c = commutant(&right_regular_all(group), tol.rank).expect("square operators");
    let lambda_c = commutant(&left_regular_all(group), tol.rank).expect("square operators");
    let rho_cc = commutant(&rho_c, tol.rank).expect("square operators");
    let lambda_cc = commutant(&lambda_c, tol.rank).expect("square operators");
    phi_report(group, &rho_cc, &lambda_cc, tol)
}

fn phi_report(group: &FiniteGroup, rho_cc: &[LinOp], lambda_cc: &[LinOp], tol: &Tolerances) -> VerificationReport {
    let mut report = VerificationReport::new("phi-conjugation", group.label(), *tol);
    let j = j_involution(group);
    let jj = &j * &j;
    if jj != LinOp::identity(group.order()) {
        report.fail_with("j-squared-not-identity", Witness::Flag(true));
    }
    let mismatched: Vec<usize> = (0..group.order())
        .filter(|&g| phi_conjugate(group, &right_regular(group, g)) != left_regular(group, g))
        .collect();
    if !mismatched.is_empty() {
        report.fail_with("phi-rho-not-lambda", Witness::Indices(mismatched));
    }
    let images: Vec<LinOp> = rho_cc.iter().map(|a| phi_conjugate(group, a)).collect();
    let into = span_containment(lambda_cc, &images, tol.rank);
    report.bound("phi-image-in-lambda-double", into, tol.residual);
    let involution = rho_cc
        .iter()
        .map(|a| phi_conjugate(group, &phi_conjugate(group, a)).max_abs_diff(a))
        .fold(0.0, f64::max);
    report.bound("phi-involution", involution, 1e-12);
    report
}

/// Outcome of [`classify_lp_isometry`].
#[derive(Clone, Debug, PartialEq)]
pub enum IsometryVerdict {
    Isometry,
    NotIsometry { witness: GVector, deviation: f64 },
}

impl IsometryVerdict {
    pub fn is_isometry(&self) -> bool {
        matches!(self, IsometryVerdict::Isometry)
    }
}

/// Deterministic probe set on `C^m`: basis vectors, pairwise sums of basis
/// vectors, then [`RANDOM_PROBES`] seeded vectors, in that order.
pub fn probe_vectors(m: usize) -> Vec<Vec<DVector<C64>>> {
    let one = C64::new(1.0, 0.0);
    let basis: Vec<DVector<C64>> = (0..m).map(|i| GVector::basis(m, i).0).collect();
    let mut sums = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let mut v = DVector::zeros(m);
            v[i] = one;
            v[j] = one;
            sums.push(v);
        }
    }
    let mut rng = sample::rng(PROBE_SEED);
    let random = (0..RANDOM_PROBES).map(|_| sample::vector(&mut rng, m)).collect();
    vec![basis, sums, random]
}

/// Largest relative deviation `| ||a x||_target / ||x||_source - 1 |` over
/// the probe set, together with the probe achieving it. The first probe tier
/// containing a deviation above `threshold` supplies the witness.
pub fn probe_norm_deviation(m: usize, threshold: f64, deviation: impl Fn(&DVector<C64>) -> f64) -> (f64, DVector<C64>) {
    let mut overall: Option<(f64, DVector<C64>)> = None;
    for tier in probe_vectors(m) {
        let mut best: Option<(f64, DVector<C64>)> = None;
        for x in tier {
            let d = deviation(&x);
            if best.as_ref().is_none_or(|(b, _)| d > *b) {
                best = Some((d, x));
            }
        }
        let Some(best) = best else { continue };
        if best.0 > threshold {
            return best;
        }
        if overall.as_ref().is_none_or(|(b, _)| best.0 > *b) {
            overall = Some(best);
        }
    }
    overall.unwrap_or((0.0, DVector::zeros(m)))
}

/// Decide whether an invertible `u` is an isometry of `l^p`.
///
/// For `p = 2` this is `u^* u = I`. For any other `p` the isometries are
/// exactly the generalized permutations with unimodular entries, which is
/// tested structurally. Non-isometries carry a probe vector witness.
pub fn classify_lp_isometry(u: &LinOp, p: PNorm, tol: &Tolerances) -> Result<IsometryVerdict> {
    if !linalg::is_invertible(u.matrix(), tol.rank) {
        return Err(Error::NotInvertible {
            ratio: if u.is_square() {
                linalg::singular_ratio(u.matrix())
            } else {
                0.0
            },
        });
    }
    let n = u.nrows();
    let isometry = if p.is_two() {
        let gram = &u.adjoint() * u;
        gram.max_abs_diff(&LinOp::identity(n)) <= tol.residual
    } else {
        is_unimodular_monomial(u, tol)
    };
    if isometry {
        return Ok(IsometryVerdict::Isometry);
    }
    let (deviation, witness) = probe_norm_deviation(n, tol.residual, |x| {
        let nx = p_norm_raw(x, p);
        (p_norm_raw(&u.apply(x), p) / nx - 1.0).abs()
    });
    Ok(IsometryVerdict::NotIsometry {
        witness: GVector(witness),
        deviation,
    })
}

/// Exactly one structurally nonzero entry per row and column, each of
/// modulus one.
pub fn is_unimodular_monomial(u: &LinOp, tol: &Tolerances) -> bool {
    let m = u.matrix();
    let zero = tol.zero * u.max_abs();
    let mut row_hits = vec![0usize; m.nrows()];
    let mut col_hits = vec![0usize; m.ncols()];
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)].norm();
            if z > zero {
                if (z - 1.0).abs() > tol.residual {
                    return false;
                }
                row_hits[i] += 1;
                col_hits[j] += 1;
            }
        }
    }
    row_hits.iter().chain(&col_hits).all(|&h| h == 1)
}
