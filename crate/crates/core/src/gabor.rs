//! Time-frequency analysis on `C^{o(G)}` for a finite abelian group `G`.
//!
//! A point of `G x G^` is stored as a pair of indices: an element `k` and a
//! character index `xi`, both in the mixed-radix numbering of
//! [`AbelianGroup`]. Characters multiply by adding their indices, so the
//! phase space is just `G x G` as a group.
//!
//! Functionals act bilinearly (`f(x) = sum f_i x_i`). The only inner product
//! in sight is the Hilbert-Schmidt one on operators.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::AbelianGroup;
use crate::linalg::{self, LinOp};
use crate::lp::{GFunctional, GVector};
use crate::report::{VerificationReport, Witness};
use crate::sample::{self, SeededRng};
use crate::tolerance::Tolerances;
use crate::C64;

/// `(k, xi)` in `G x G^`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TFPoint {
    pub k: usize,
    pub xi: usize,
}

impl TFPoint {
    pub const ORIGIN: TFPoint = TFPoint { k: 0, xi: 0 };

    pub fn new(k: usize, xi: usize) -> Self {
        TFPoint { k, xi }
    }

    pub fn add(self, other: TFPoint, g: &AbelianGroup) -> TFPoint {
        TFPoint::new(g.add(self.k, other.k), g.add(self.xi, other.xi))
    }

    pub fn neg(self, g: &AbelianGroup) -> TFPoint {
        TFPoint::new(g.neg(self.k), g.neg(self.xi))
    }

    /// Flat index `k * o(G) + xi`.
    pub fn index(self, g: &AbelianGroup) -> usize {
        self.k * g.order() + self.xi
    }

    pub fn from_index(idx: usize, g: &AbelianGroup) -> TFPoint {
        TFPoint::new(idx / g.order(), idx % g.order())
    }

    pub fn validate(self, g: &AbelianGroup) -> Result<()> {
        for v in [self.k, self.xi] {
            if v >= g.order() {
                return Err(Error::InvalidElement {
                    index: v,
                    order: g.order(),
                });
            }
        }
        Ok(())
    }
}

/// Every point of `G x G^`, in flat-index order.
pub fn phase_space(g: &AbelianGroup) -> impl Iterator<Item = TFPoint> + '_ {
    (0..g.order() * g.order()).map(move |i| TFPoint::from_index(i, g))
}

/// `(pi(k, xi) x)_g = xi(g) x_{g - k}`.
pub fn tf_shift(g: &AbelianGroup, pt: TFPoint) -> LinOp {
    let n = g.order();
    // delta_j goes to xi(j + k) delta_{j + k}
    let target: Vec<usize> = (0..n).map(|j| g.add(j, pt.k)).collect();
    LinOp::monomial(&target, |j| g.char_value(pt.xi, target[j]))
}

/// `pi(lambda)^{-1} = conj(xi(k)) pi(-lambda)`.
pub fn tf_shift_inverse(g: &AbelianGroup, pt: TFPoint) -> LinOp {
    tf_shift(g, pt.neg(g)).scale(g.char_value(pt.xi, pt.k).conj())
}

/// Whether `pi(a)` and `pi(b)` commute, decided on integer phases:
/// `chi(k) = xi(l)` for `a = (k, xi)`, `b = (l, chi)`.
pub fn shifts_commute(g: &AbelianGroup, a: TFPoint, b: TFPoint) -> bool {
    g.phase(b.xi, a.k) == g.phase(a.xi, b.k)
}

/// Over all pairs `lambda = (k, xi)`, `mu = (l, chi)`:
/// `pi(lambda + mu) = chi(k) pi(lambda) pi(mu)`,
/// `pi(lambda) pi(mu) = conj(chi(k)) xi(l) pi(mu) pi(lambda)`, and the
/// inverse formula.
pub fn check_tf_commutation(g: &AbelianGroup, tol: &Tolerances, order_limit: usize) -> VerificationReport {
    let mut report = VerificationReport::new("tf-commutation", g.label(), *tol);
    if g.order() > order_limit {
        return report.not_applicable(format!("order {} exceeds limit {order_limit}", g.order()));
    }
    let points: Vec<TFPoint> = phase_space(g).collect();
    let shifts: Vec<LinOp> = points.iter().map(|&p| tf_shift(g, p)).collect();
    let n = g.order();
    let id = LinOp::identity(n);

    let mut sum_worst = (0.0, [0, 0]);
    let mut swap_worst = (0.0, [0, 0]);
    for (a, la) in points.iter().enumerate() {
        for (b, mu) in points.iter().enumerate() {
            let prod = &shifts[a] * &shifts[b];
            let sum = &shifts[la.add(*mu, g).index(g)];
            let d = sum.max_abs_diff(&prod.scale(g.char_value(mu.xi, la.k)));
            if d > sum_worst.0 {
                sum_worst = (d, [a, b]);
            }
            let factor = g.char_value(mu.xi, la.k).conj() * g.char_value(la.xi, mu.k);
            let d = prod.max_abs_diff(&(&shifts[b] * &shifts[a]).scale(factor));
            if d > swap_worst.0 {
                swap_worst = (d, [a, b]);
            }
        }
    }
    let mut inv_worst = (0.0, 0);
    for (a, p) in points.iter().enumerate() {
        let inv = tf_shift_inverse(g, *p);
        let d = (&shifts[a] * &inv)
            .max_abs_diff(&id)
            .max((&inv * &shifts[a]).max_abs_diff(&id));
        if d > inv_worst.0 {
            inv_worst = (d, a);
        }
    }
    let thr = tol.residual;
    if !report.bound("addition", sum_worst.0, thr) {
        report.witness("addition-pair", Witness::Indices(sum_worst.1.to_vec()));
    }
    if !report.bound("commutation", swap_worst.0, thr) {
        report.witness("commutation-pair", Witness::Indices(swap_worst.1.to_vec()));
    }
    if !report.bound("inverse", inv_worst.0, thr) {
        report.witness("inverse-point", Witness::Indices(vec![inv_worst.1]));
    }
    report.witness("pairs", Witness::Count(points.len() * points.len()));
    report
}

/// A nonzero functional and a nonzero vector on `C^{o(G)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaborPair {
    f: GFunctional,
    tau: GVector,
}

impl GaborPair {
    pub fn new(f: GFunctional, tau: GVector) -> Result<Self> {
        if f.len() != tau.len() {
            return Err(Error::DimensionMismatch {
                expected: f.len(),
                found: tau.len(),
            });
        }
        if f.is_zero() {
            return Err(Error::ZeroGenerator("f"));
        }
        if tau.is_zero() {
            return Err(Error::ZeroGenerator("tau"));
        }
        Ok(GaborPair { f, tau })
    }

    /// Entries uniform in the unit square, drawn from `rng`.
    pub fn random(n: usize, rng: &mut SeededRng) -> Self {
        loop {
            let f = GFunctional::new(sample::vector(rng, n)).expect("finite");
            let tau = GVector::new(sample::vector(rng, n)).expect("finite");
            if let Ok(p) = GaborPair::new(f, tau) {
                return p;
            }
        }
    }

    pub fn seeded(n: usize, seed: u64) -> Self {
        Self::random(n, &mut sample::rng(seed))
    }

    pub fn f(&self) -> &GFunctional {
        &self.f
    }

    pub fn tau(&self) -> &GVector {
        &self.tau
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// `f(tau)`.
    pub fn pairing(&self) -> C64 {
        self.f.eval(&self.tau)
    }

    fn check_dim(&self, g: &AbelianGroup) -> Result<()> {
        if self.len() != g.order() {
            return Err(Error::DimensionMismatch {
                expected: g.order(),
                found: self.len(),
            });
        }
        Ok(())
    }

    /// Entry-size bound used to scale thresholds.
    fn scale(&self) -> f64 {
        let f1: f64 = self.f.coeffs().iter().map(|z| z.norm()).sum();
        f1 * linalg::max_abs_vec(self.tau.coeffs())
    }
}

/// Rank-one operator `x -> f(x) v`.
fn outer(v: &DVector<C64>, f: &DVector<C64>) -> DMatrix<C64> {
    v * f.transpose()
}

/// `sum_{lambda in points} (pi(lambda) tau) (f o pi(lambda)^{-1})`, summed
/// in the given order.
fn shift_sum(g: &AbelianGroup, pair: &GaborPair, points: &[TFPoint]) -> LinOp {
    let n = g.order();
    let mut s = DMatrix::zeros(n, n);
    for &pt in points {
        let v = tf_shift(g, pt).apply(pair.tau.coeffs());
        let w = pair.f.compose(&tf_shift_inverse(g, pt));
        s += outer(&v, w.coeffs());
    }
    LinOp::new(s)
}

/// `W_f`: rows `f o pi(lambda)^{-1}` over all of `G x G^`.
pub fn analysis_matrix(g: &AbelianGroup, pair: &GaborPair) -> LinOp {
    let n = g.order();
    let rows: Vec<DVector<C64>> = phase_space(g)
        .map(|pt| pair.f.compose(&tf_shift_inverse(g, pt)).coeffs().clone())
        .collect();
    LinOp::from_fn(n * n, n, |r, c| rows[r][c])
}

/// `V_tau`: columns `pi(lambda) tau` over all of `G x G^`.
pub fn synthesis_matrix(g: &AbelianGroup, pair: &GaborPair) -> LinOp {
    let n = g.order();
    let cols: Vec<DVector<C64>> = phase_space(g)
        .map(|pt| tf_shift(g, pt).apply(pair.tau.coeffs()))
        .collect();
    LinOp::from_fn(n, n * n, |r, c| cols[c][r])
}

/// `V_tau W_f = o(G) f(tau) I`.
pub fn moyal_check(g: &AbelianGroup, pair: &GaborPair, tol: &Tolerances) -> Result<VerificationReport> {
    pair.check_dim(g)?;
    let n = g.order();
    let product = &synthesis_matrix(g, pair) * &analysis_matrix(g, pair);
    let scalar = pair.pairing() * n as f64;
    let residual = product.max_abs_diff(&LinOp::identity(n).scale(scalar));
    let mut report = VerificationReport::new("moyal", g.label(), *tol);
    report.bound("moyal", residual, tol.scaled((n * n) as f64 * pair.scale()));
    report.witness("scalar", Witness::scalar(scalar));
    Ok(report)
}

/// `1 / (o(G) f(tau)) sum_lambda f(pi(lambda)^{-1} x) pi(lambda) tau`.
pub fn inversion_expand(g: &AbelianGroup, pair: &GaborPair, x: &GVector, tol: &Tolerances) -> Result<GVector> {
    pair.check_dim(g)?;
    if x.len() != g.order() {
        return Err(Error::DimensionMismatch {
            expected: g.order(),
            found: x.len(),
        });
    }
    let pairing = pair.pairing();
    if pairing.norm() <= tol.zero {
        return Err(Error::VanishingPairing {
            modulus: pairing.norm(),
        });
    }
    let mut acc = DVector::zeros(g.order());
    for pt in phase_space(g) {
        let coeff = pair.f.eval_raw(&tf_shift_inverse(g, pt).apply(x.coeffs()));
        acc += tf_shift(g, pt).apply(pair.tau.coeffs()) * coeff;
    }
    GVector::new(acc / (pairing * g.order() as f64))
}

/// Runs the inversion formula on each of `xs` and reports the worst error.
pub fn check_inversion(
    g: &AbelianGroup,
    pair: &GaborPair,
    xs: &[GVector],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("inversion", g.label(), *tol);
    let mut worst = (0.0, 0);
    for (i, x) in xs.iter().enumerate() {
        let y = inversion_expand(g, pair, x, tol)?;
        let d = linalg::max_abs_vec(&(y.coeffs() - x.coeffs()));
        if d > worst.0 {
            worst = (d, i);
        }
    }
    let scale = xs.iter().map(|x| linalg::max_abs_vec(x.coeffs())).fold(0.0, f64::max);
    let ratio = pair.scale() / pair.pairing().norm();
    if !report.bound("reconstruction", worst.0, tol.scaled(scale * ratio)) {
        report.witness("input", Witness::Indices(vec![worst.1]));
    }
    report.witness("inputs", Witness::Count(xs.len()));
    Ok(report)
}

/// A subgroup of `G x G^`, points sorted by flat index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    group: AbelianGroup,
    points: Vec<TFPoint>,
}

impl Lattice {
    /// Accepts `points` only if they already form a subgroup.
    pub fn from_points(group: &AbelianGroup, points: impl IntoIterator<Item = TFPoint>) -> Result<Self> {
        let set: BTreeSet<TFPoint> = points.into_iter().collect();
        for p in &set {
            p.validate(group)?;
        }
        if !set.contains(&TFPoint::ORIGIN) {
            return Err(Error::NotClosed { a: 0, b: 0 });
        }
        for a in &set {
            for b in &set {
                if !set.contains(&a.add(*b, group)) {
                    return Err(Error::NotClosed {
                        a: a.index(group),
                        b: b.index(group),
                    });
                }
            }
        }
        Ok(Self::sorted(group, set))
    }

    fn sorted(group: &AbelianGroup, set: BTreeSet<TFPoint>) -> Self {
        let mut points: Vec<TFPoint> = set.into_iter().collect();
        points.sort_by_key(|p| p.index(group));
        Lattice {
            group: group.clone(),
            points,
        }
    }

    pub fn trivial(group: &AbelianGroup) -> Self {
        Lattice {
            group: group.clone(),
            points: vec![TFPoint::ORIGIN],
        }
    }

    pub fn full(group: &AbelianGroup) -> Self {
        Lattice {
            group: group.clone(),
            points: phase_space(group).collect(),
        }
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn points(&self) -> &[TFPoint] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn contains(&self, p: TFPoint) -> bool {
        self.points
            .binary_search_by_key(&p.index(&self.group), |q| q.index(&self.group))
            .is_ok()
    }

    /// Flat indices, for keys and witnesses.
    pub fn indices(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.index(&self.group)).collect()
    }
}

fn closure(group: &AbelianGroup, seed: impl IntoIterator<Item = TFPoint>) -> BTreeSet<TFPoint> {
    let gens: Vec<TFPoint> = seed.into_iter().collect();
    let mut set = BTreeSet::from([TFPoint::ORIGIN]);
    let mut frontier = vec![TFPoint::ORIGIN];
    while let Some(p) = frontier.pop() {
        for &s in &gens {
            let q = p.add(s, group);
            if set.insert(q) {
                frontier.push(q);
            }
        }
    }
    set
}

/// Smallest lattice containing `gens`.
pub fn lattice_from_generators(group: &AbelianGroup, gens: &[TFPoint]) -> Result<Lattice> {
    for p in gens {
        p.validate(group)?;
    }
    Ok(Lattice::sorted(group, closure(group, gens.iter().copied())))
}

/// Every subgroup of `G x G^`, found by repeatedly adjoining one point to a
/// known subgroup until nothing new appears. Sorted by order, then points.
pub fn all_lattices(group: &AbelianGroup) -> Vec<Lattice> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut found = Vec::new();
    let mut queue = vec![closure(group, [])];
    while let Some(set) = queue.pop() {
        let lat = Lattice::sorted(group, set);
        if !seen.insert(lat.indices()) {
            continue;
        }
        for p in phase_space(group) {
            if !lat.contains(p) {
                queue.push(closure(group, lat.points.iter().copied().chain([p])));
            }
        }
        found.push(lat);
    }
    found.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.indices().cmp(&b.indices())));
    found
}

/// Subgroups generated by at most two points.
pub fn two_generator_lattices(group: &AbelianGroup) -> Vec<Lattice> {
    let pts: Vec<TFPoint> = phase_space(group).collect();
    let mut seen = BTreeMap::new();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i..] {
            let lat = Lattice::sorted(group, closure(group, [a, b]));
            seen.entry(lat.indices()).or_insert(lat);
        }
    }
    let mut out: Vec<Lattice> = seen.into_values().collect();
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.indices().cmp(&b.indices())));
    out
}

/// `Lambda^0` by the phase criterion `chi(k) = xi(l)` for all `(k, xi)` in
/// the lattice.
pub fn adjoint_lattice(lam: &Lattice) -> Lattice {
    let g = &lam.group;
    let points = phase_space(g).filter(|&mu| lam.points.iter().all(|&l| shifts_commute(g, l, mu)));
    Lattice::sorted(g, points.collect())
}

/// `Lambda^0` by testing `pi(lambda) pi(mu) = pi(mu) pi(lambda)` as matrices.
pub fn adjoint_lattice_by_matrices(lam: &Lattice, tol: &Tolerances) -> Lattice {
    let g = &lam.group;
    let shifts: Vec<LinOp> = lam.points.iter().map(|&p| tf_shift(g, p)).collect();
    let points = phase_space(g).filter(|&mu| {
        let m = tf_shift(g, mu);
        shifts.iter().all(|s| s.commutator(&m).max_abs() <= tol.residual)
    });
    Lattice::sorted(g, points.collect())
}

/// Adjoint lattice, checked to be a subgroup and, when asked, against the
/// matrix computation.
pub fn check_adjoint_lattice(lam: &Lattice, by_matrices: bool, tol: &Tolerances) -> VerificationReport {
    let g = &lam.group;
    let mut report = VerificationReport::new("adjoint-lattice", g.label(), *tol);
    let adj = adjoint_lattice(lam);
    report.witness("lattice", Witness::Indices(lam.indices()));
    report.witness("adjoint", Witness::Indices(adj.indices()));
    report.witness("adjoint-order", Witness::Count(adj.order()));
    if Lattice::from_points(g, adj.points.iter().copied()).is_err() {
        report.fail_with("adjoint-not-subgroup", Witness::Flag(true));
    }
    let n = g.order();
    if lam.order() * adj.order() != n * n {
        report.fail_with("order-product", Witness::Count(lam.order() * adj.order()));
    }
    let double = adjoint_lattice(&adj);
    report.witness("involution", Witness::Flag(double == *lam));
    if double != *lam {
        report.fail();
    }
    if by_matrices {
        let by_m = adjoint_lattice_by_matrices(lam, tol);
        report.witness("matrix-agreement", Witness::Flag(by_m == adj));
        if by_m != adj {
            report.fail_with("matrix-adjoint", Witness::Indices(by_m.indices()));
        }
    }
    report
}

/// `S_{f, tau, Lambda} = sum_{lambda} (pi(lambda) tau)(f o pi(lambda)^{-1})`.
pub fn frame_operator(pair: &GaborPair, lam: &Lattice) -> Result<LinOp> {
    pair.check_dim(&lam.group)?;
    Ok(shift_sum(&lam.group, pair, &lam.points))
}

/// Invertible under the relative singular-value threshold `tol.rank`.
pub fn is_frame(s: &LinOp, tol: &Tolerances) -> bool {
    linalg::is_invertible(s.matrix(), tol.rank)
}

/// Frame verdict with the singular-value ratio as evidence.
pub fn frame_check(pair: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<VerificationReport> {
    let s = frame_operator(pair, lam)?;
    let mut report = VerificationReport::new("frame-check", lam.group.label(), *tol);
    let ratio = linalg::singular_ratio(s.matrix());
    report.record("singular-ratio", ratio);
    report.witness("lattice-order", Witness::Count(lam.order()));
    report.witness("rank", Witness::Count(linalg::rank(s.matrix(), tol.rank)));
    if !is_frame(&s, tol) {
        report.fail_with("is-frame", Witness::Flag(false));
    } else {
        report.witness("is-frame", Witness::Flag(true));
    }
    report.push(check_frame_op_commutes(pair, lam, tol)?);
    Ok(report)
}

/// `max_{mu in Lambda} ||pi(mu) S - S pi(mu)||`.
pub fn check_frame_op_commutes(pair: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<VerificationReport> {
    let g = &lam.group;
    let s = frame_operator(pair, lam)?;
    let mut report = VerificationReport::new("frame-operator-commutes", g.label(), *tol);
    let mut worst = (0.0, 0);
    for p in &lam.points {
        let d = tf_shift(g, *p).commutator(&s).max_abs();
        if d > worst.0 {
            worst = (d, p.index(g));
        }
    }
    if !report.bound("max-commutator", worst.0, tol.scaled(lam.order() as f64 * pair.scale())) {
        report.witness("point", Witness::Indices(vec![worst.1]));
    }
    Ok(report)
}

/// `(f S^{-1}, S^{-1} tau)`, checked through both dual reconstruction
/// formulas before it is returned.
pub fn canonical_dual(pair: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<GaborPair> {
    let s = frame_operator(pair, lam)?;
    if !is_frame(&s, tol) {
        return Err(Error::NotAFrame);
    }
    let s_inv = LinOp::new(linalg::inverse(s.matrix(), tol.rank)?);
    let dual = GaborPair::new(pair.f.compose(&s_inv), pair.tau.mapped(&s_inv))?;
    let check = verify_dual(pair, &dual, lam, tol)?;
    if !check.passed() {
        return Err(Error::PostconditionFailed(Box::new(check)));
    }
    Ok(dual)
}

/// `x = sum phi(pi(lambda)^{-1} x) pi(lambda) tau = sum f(pi(lambda)^{-1} x) pi(lambda) omega`
/// on every basis vector; `dual` holds `(phi, omega)`.
pub fn verify_dual(pair: &GaborPair, dual: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<VerificationReport> {
    let g = &lam.group;
    pair.check_dim(g)?;
    dual.check_dim(g)?;
    let n = g.order();
    let mut report = VerificationReport::new("canonical-dual", g.label(), *tol);
    let analysis_side = GaborPair {
        f: dual.f.clone(),
        tau: pair.tau.clone(),
    };
    let synthesis_side = GaborPair {
        f: pair.f.clone(),
        tau: dual.tau.clone(),
    };
    let id = LinOp::identity(n);
    // Applying the operator to every basis vector is reading off its columns.
    let a = shift_sum(g, &analysis_side, &lam.points).max_abs_diff(&id);
    let b = shift_sum(g, &synthesis_side, &lam.points).max_abs_diff(&id);
    let scale = lam.order() as f64 * analysis_side.scale().max(synthesis_side.scale());
    report.bound("dual-functional", a, tol.scaled(scale));
    report.bound("dual-vector", b, tol.scaled(scale));
    report.witness("phi", Witness::vector(dual.f.coeffs().iter()));
    report.witness("omega", Witness::vector(dual.tau.coeffs().iter()));
    Ok(report)
}

/// `<T, S>_HS = sum_g <T delta_g, S delta_g>`.
pub fn hs_inner(t: &LinOp, s: &LinOp) -> C64 {
    t.matrix()
        .iter()
        .zip(s.matrix().iter())
        .map(|(a, b)| a * b.conj())
        .sum()
}

/// Expansion of the frame operator over the adjoint lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct JanssenDecomposition {
    /// `mu` in `Lambda^0` with `(o(Lambda) / o(G)) f(pi(mu)^{-1} tau)`.
    pub coeffs: Vec<(TFPoint, C64)>,
    /// `(1 / o(G)) <S, pi(mu)>_HS` in the same order.
    pub hs_coeffs: Vec<C64>,
    /// `||S - sum c_mu pi(mu)||_max`.
    pub residual: f64,
    /// `max_mu |c_mu - hs_mu|`.
    pub formula_gap: f64,
    /// Magnitude bound for thresholds.
    pub scale: f64,
}

pub fn janssen_decompose(pair: &GaborPair, lam: &Lattice) -> Result<JanssenDecomposition> {
    let g = &lam.group;
    let s = frame_operator(pair, lam)?;
    let adj = adjoint_lattice(lam);
    let n = g.order() as f64;
    let weight = lam.order() as f64 / n;
    let mut expansion = LinOp::zeros(g.order(), g.order());
    let mut coeffs = Vec::with_capacity(adj.order());
    let mut hs_coeffs = Vec::with_capacity(adj.order());
    let mut formula_gap = 0.0f64;
    for &mu in &adj.points {
        let shift = tf_shift(g, mu);
        let c = pair.f.eval_raw(&tf_shift_inverse(g, mu).apply(pair.tau.coeffs())) * weight;
        let hs = hs_inner(&s, &shift) / n;
        formula_gap = formula_gap.max((c - hs).norm());
        expansion = expansion.add(&shift.scale(c));
        coeffs.push((mu, c));
        hs_coeffs.push(hs);
    }
    Ok(JanssenDecomposition {
        residual: s.max_abs_diff(&expansion),
        coeffs,
        hs_coeffs,
        formula_gap,
        scale: lam.order() as f64 * pair.scale(),
    })
}

pub fn check_janssen(pair: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<VerificationReport> {
    let d = janssen_decompose(pair, lam)?;
    let mut report = VerificationReport::new("janssen", lam.group.label(), *tol);
    let thr = tol.scaled(d.scale);
    report.bound("expansion", d.residual, thr);
    report.bound("coefficient-formulas", d.formula_gap, thr);
    report.witness(
        "adjoint",
        Witness::Indices(d.coeffs.iter().map(|(p, _)| p.index(&lam.group)).collect()),
    );
    report.witness("coefficients", Witness::vector(d.coeffs.iter().map(|(_, c)| c)));
    Ok(report)
}

/// Both sides of the biorthogonality criterion, evaluated independently.
#[derive(Clone, Debug, PartialEq)]
pub struct WexlerRazOutcome {
    /// `f(pi(mu)^{-1} tau)` for `mu` in `Lambda^0`, origin first.
    pub table: Vec<(TFPoint, C64)>,
    /// `(o(Lambda) / o(G)) max_mu |f(pi(mu)^{-1} tau) - (o(G) / o(Lambda)) delta_{mu,0}|`,
    /// on the same scale as the frame operator's entries.
    pub biorthogonality_residual: f64,
    /// `||S - I||_max`.
    pub identity_residual: f64,
    pub biorthogonal: bool,
    pub identity: bool,
}

impl WexlerRazOutcome {
    pub fn agree(&self) -> bool {
        self.biorthogonal == self.identity
    }
}

pub fn wexler_raz(pair: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<WexlerRazOutcome> {
    let g = &lam.group;
    let s = frame_operator(pair, lam)?;
    let adj = adjoint_lattice(lam);
    let n = g.order() as f64;
    let ratio = lam.order() as f64 / n;
    let mut table = Vec::with_capacity(adj.order());
    let mut worst = 0.0f64;
    for &mu in &adj.points {
        let v = pair.f.eval_raw(&tf_shift_inverse(g, mu).apply(pair.tau.coeffs()));
        let target = if mu == TFPoint::ORIGIN { 1.0 / ratio } else { 0.0 };
        worst = worst.max((v - target).norm());
        table.push((mu, v));
    }
    let biorthogonality_residual = ratio * worst;
    let identity_residual = s.max_abs_diff(&LinOp::identity(g.order()));
    Ok(WexlerRazOutcome {
        table,
        biorthogonality_residual,
        identity_residual,
        biorthogonal: biorthogonality_residual <= tol.residual,
        identity: identity_residual <= tol.residual,
    })
}

/// Passes when both sides hold; the `equivalence` subcheck fails only if
/// they disagree.
pub fn wexler_raz_check(pair: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<VerificationReport> {
    let g = &lam.group;
    let w = wexler_raz(pair, lam, tol)?;
    let mut report = VerificationReport::new("wexler-raz", g.label(), *tol);
    report.bound("biorthogonality", w.biorthogonality_residual, tol.residual);
    report.bound("frame-operator-identity", w.identity_residual, tol.residual);
    report.witness(
        "adjoint",
        Witness::Indices(w.table.iter().map(|(p, _)| p.index(g)).collect()),
    );
    report.witness("table", Witness::vector(w.table.iter().map(|(_, v)| v)));
    let mut eq = VerificationReport::new("equivalence", g.label(), *tol);
    eq.witness("biorthogonal", Witness::Flag(w.biorthogonal));
    eq.witness("identity", Witness::Flag(w.identity));
    if !w.agree() {
        eq.fail();
    }
    report.push(eq);
    Ok(report)
}

/// For a frame, the vectors `pi(mu)^{-1} tau` and the functionals
/// `f o pi(mu)^{-1}` over `mu` in `Lambda^0` are each linearly independent.
pub fn ron_shen_check(pair: &GaborPair, lam: &Lattice, tol: &Tolerances) -> Result<VerificationReport> {
    let g = &lam.group;
    let s = frame_operator(pair, lam)?;
    if !is_frame(&s, tol) {
        return Err(Error::NotAFrame);
    }
    let adj = adjoint_lattice(lam);
    let n = g.order();
    let m = adj.order();
    let inverses: Vec<LinOp> = adj.points.iter().map(|&mu| tf_shift_inverse(g, mu)).collect();
    let cols: Vec<DVector<C64>> = inverses.iter().map(|op| op.apply(pair.tau.coeffs())).collect();
    let rows: Vec<DVector<C64>> = inverses.iter().map(|op| pair.f.compose(op).coeffs().clone()).collect();
    let vectors = DMatrix::from_fn(n, m, |r, c| cols[c][r]);
    let functionals = DMatrix::from_fn(m, n, |r, c| rows[r][c]);
    let vr = linalg::rank(&vectors, tol.rank);
    let fr = linalg::rank(&functionals, tol.rank);
    let mut report = VerificationReport::new("ron-shen", g.label(), *tol);
    report.witness("adjoint-order", Witness::Count(m));
    report.witness("vector-rank", Witness::Count(vr));
    report.witness("functional-rank", Witness::Count(fr));
    report.record("vector-rank-deficit", (m - vr) as f64);
    report.record("functional-rank-deficit", (m - fr) as f64);
    if vr != m || fr != m {
        report.fail();
    }
    Ok(report)
}

/// `<pi(lambda), pi(mu)>_HS = o(G) delta_{lambda, mu}` over all pairs.
pub fn check_hs_onb(g: &AbelianGroup, tol: &Tolerances, order_limit: usize) -> VerificationReport {
    let mut report = VerificationReport::new("hs-onb", g.label(), *tol);
    if g.order() > order_limit {
        return report.not_applicable(format!("order {} exceeds limit {order_limit}", g.order()));
    }
    let shifts: Vec<LinOp> = phase_space(g).map(|p| tf_shift(g, p)).collect();
    let n = g.order() as f64;
    let mut worst = (0.0, [0, 0]);
    for (a, sa) in shifts.iter().enumerate() {
        for (b, sb) in shifts.iter().enumerate() {
            let target = if a == b { n } else { 0.0 };
            let d = (hs_inner(sa, sb) - target).norm();
            if d > worst.0 {
                worst = (d, [a, b]);
            }
        }
    }
    if !report.bound("gram", worst.0, tol.residual) {
        report.witness("pair", Witness::Indices(worst.1.to_vec()));
    }
    report.witness("operators", Witness::Count(shifts.len()));
    report.witness("dimension", Witness::Count(g.order() * g.order()));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{classify_lp_isometry, PNorm};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ab(orders: &[usize]) -> AbelianGroup {
        AbelianGroup::new(orders).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pair(f: Vec<C64>, tau: Vec<C64>) -> GaborPair {
        GaborPair::new(GFunctional::from_vec(f).unwrap(), GVector::from_vec(tau).unwrap()).unwrap()
    }

    fn unit(n: usize, i: usize) -> Vec<C64> {
        (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()
    }

    /// `sum_{g,h} M_{g,h} x_h` written out, as an independent operator action.
    fn apply_by_hand(m: &LinOp, x: &[C64]) -> Vec<C64> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m.get(i, j) * x[j]).sum())
            .collect()
    }

    fn self_adjoint_z4() -> Lattice {
        let g = ab(&[4]);
        lattice_from_generators(&g, &[TFPoint::new(2, 0), TFPoint::new(0, 2)]).unwrap()
    }

    #[test]
    fn tf_shift_examples() {
        let g = ab(&[2]);
        assert_eq!(tf_shift(&g, TFPoint::ORIGIN), LinOp::identity(2));
        let s = tf_shift(&g, TFPoint::new(1, 1));
        let expect = [[0.0, 1.0], [-1.0, 0.0]];
        assert_eq!(s, LinOp::from_fn(2, 2, |i, j| c(expect[i][j], 0.0)));
        assert_eq!(
            apply_by_hand(&s, &[c(3.0, 0.0), c(5.0, 0.0)]),
            vec![c(5.0, 0.0), c(-3.0, 0.0)]
        );

        let g = ab(&[2, 3]);
        for p in phase_space(&g) {
            let d = (&tf_shift(&g, p) * &tf_shift_inverse(&g, p)).max_abs_diff(&LinOp::identity(6));
            assert!(d <= 1e-12);
        }
    }

    #[test]
    fn tf_shift_definition_entrywise() {
        let g = ab(&[2, 3]);
        let x: Vec<C64> = (0..6).map(|i| c(i as f64 + 1.0, -(i as f64))).collect();
        for p in phase_space(&g) {
            let y = apply_by_hand(&tf_shift(&g, p), &x);
            for (h, yh) in y.iter().enumerate() {
                let expect = g.char_value(p.xi, h) * x[g.add(h, g.neg(p.k))];
                assert!((yh - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn tf_shifts_are_lp_isometries() {
        let g = ab(&[2, 2]);
        for p in phase_space(&g) {
            for q in [1.0, 2.0, 3.0] {
                let v = classify_lp_isometry(&tf_shift(&g, p), PNorm::new(q).unwrap(), &tol()).unwrap();
                assert!(v.is_isometry());
            }
        }
    }

    #[test]
    fn tf_commutation_examples() {
        for g in [ab(&[1]), ab(&[2]), ab(&[2, 2]), ab(&[3])] {
            let r = check_tf_commutation(&g, &tol(), 16);
            assert!(r.passed(), "{r:?}");
            assert!(r.max_residual() <= 1e-12);
        }
        assert_eq!(
            check_tf_commutation(&ab(&[2]), &tol(), 16).witnesses["pairs"],
            Witness::Count(16)
        );
        assert_eq!(
            check_tf_commutation(&ab(&[2, 2]), &tol(), 16).witnesses["pairs"],
            Witness::Count(256)
        );
    }

    #[test]
    fn moyal_examples() {
        let g = ab(&[2]);
        let std = pair(unit(2, 0), unit(2, 0));
        let r = moyal_check(&g, &std, &tol()).unwrap();
        assert!(r.passed());
        assert_eq!(r.witnesses["scalar"], Witness::Scalar([2.0, 0.0]));
        // brute force: the four-term sum is 2I
        let s = frame_operator(&std, &Lattice::full(&g)).unwrap();
        assert!(s.max_abs_diff(&LinOp::identity(2).scale(c(2.0, 0.0))) < 1e-15);

        let orth = pair(unit(2, 0), unit(2, 1));
        assert!(moyal_check(&g, &orth, &tol()).unwrap().passed());
        assert!(frame_operator(&orth, &Lattice::full(&g)).unwrap().max_abs() < 1e-15);

        let g = ab(&[4]);
        let r = moyal_check(&g, &GaborPair::seeded(4, 3), &tol()).unwrap();
        assert!(r.residuals["moyal"] <= 1e-10);
    }

    #[test]
    fn inversion_examples() {
        let g = ab(&[2]);
        let std = pair(unit(2, 0), unit(2, 0));
        assert!(inversion_expand(&g, &std, &GVector::zeros(2), &tol())
            .unwrap()
            .is_zero());
        let y = inversion_expand(&g, &std, &GVector::basis(2, 1), &tol()).unwrap();
        assert!(linalg::max_abs_vec(&(y.coeffs() - GVector::basis(2, 1).coeffs())) < 1e-15);

        let g = ab(&[3]);
        let mut rng = sample::rng(5);
        let p = GaborPair::random(3, &mut rng);
        let x = GVector::new(sample::vector(&mut rng, 3)).unwrap();
        let y = inversion_expand(&g, &p, &x, &tol()).unwrap();
        assert!(linalg::max_abs_vec(&(y.coeffs() - x.coeffs())) <= 1e-10);

        let orth = pair(unit(2, 0), unit(2, 1));
        assert!(matches!(
            inversion_expand(&ab(&[2]), &orth, &GVector::basis(2, 0), &tol()),
            Err(Error::VanishingPairing { .. })
        ));
    }

    #[test]
    fn lattice_examples() {
        let g = ab(&[4]);
        assert_eq!(lattice_from_generators(&g, &[]).unwrap().points(), &[TFPoint::ORIGIN]);
        let lam = self_adjoint_z4();
        assert_eq!(
            lam.points(),
            &[
                TFPoint::new(0, 0),
                TFPoint::new(0, 2),
                TFPoint::new(2, 0),
                TFPoint::new(2, 2)
            ]
        );
        let all: Vec<TFPoint> = phase_space(&g).collect();
        assert_eq!(lattice_from_generators(&g, &all).unwrap().order(), 16);
        assert!(lattice_from_generators(&g, &[TFPoint::new(4, 0)]).is_err());
        assert!(Lattice::from_points(&g, [TFPoint::ORIGIN, TFPoint::new(1, 0)]).is_err());
    }

    #[test]
    fn subgroup_counts() {
        // Known subgroup counts of G x G^ ~ G x G.
        let count = |o: &[usize]| all_lattices(&ab(o)).len();
        assert_eq!(count(&[1]), 1);
        assert_eq!(count(&[2]), 5); // Z2 x Z2
        assert_eq!(count(&[3]), 6); // Z3 x Z3
        assert_eq!(count(&[4]), 15); // Z4 x Z4
        assert_eq!(count(&[2, 2]), 67); // Z2^4
                                        // Z2^4 has subgroups needing more than two generators.
        assert!(two_generator_lattices(&ab(&[2, 2])).len() < 67);
        assert_eq!(two_generator_lattices(&ab(&[4])).len(), 15);
    }

    #[test]
    fn adjoint_examples() {
        let g = ab(&[4]);
        assert_eq!(adjoint_lattice(&Lattice::trivial(&g)), Lattice::full(&g));
        assert_eq!(adjoint_lattice(&Lattice::full(&g)), Lattice::trivial(&g));
        assert_eq!(
            adjoint_lattice_by_matrices(&Lattice::full(&g), &tol()),
            Lattice::trivial(&g)
        );
        let lam = self_adjoint_z4();
        assert_eq!(adjoint_lattice(&lam), lam);
        assert_eq!(adjoint_lattice_by_matrices(&lam, &tol()), lam);
        assert!(check_adjoint_lattice(&lam, true, &tol()).passed());
    }

    #[test]
    fn frame_operator_examples() {
        let g = ab(&[4]);
        let p = GaborPair::seeded(4, 9);
        let s = frame_operator(&p, &Lattice::full(&g)).unwrap();
        assert!(s.max_abs_diff(&LinOp::identity(4).scale(p.pairing() * 4.0)) < 1e-12);

        let s = frame_operator(&p, &Lattice::trivial(&g)).unwrap();
        let x = [c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0), c(-1.0, 1.0)];
        let fx: C64 = p.f().coeffs().iter().zip(&x).map(|(a, b)| a * b).sum();
        let got = apply_by_hand(&s, &x);
        for (i, v) in got.iter().enumerate() {
            assert!((v - fx * p.tau().coeffs()[i]).norm() < 1e-13);
        }
        assert!(!is_frame(&s, &tol()));

        // f = zeta_0, tau = delta_0 on the self-adjoint lattice: four terms,
        // each pi(lambda) delta_0 zeta_0 pi(lambda)^{-1}, a diagonal projection.
        let lam = self_adjoint_z4();
        let std = pair(unit(4, 0), unit(4, 0));
        let s = frame_operator(&std, &lam).unwrap();
        let diag = [2.0, 0.0, 2.0, 0.0];
        assert!(s.max_abs_diff(&LinOp::from_fn(4, 4, |i, j| c(if i == j { diag[i] } else { 0.0 }, 0.0))) < 1e-15);
        assert_eq!(is_frame(&s, &tol()), s.matrix().determinant().norm() > 1e-12);
        assert!(!is_frame(&s, &tol()));

        let s = frame_operator(&p, &lam).unwrap();
        assert_eq!(is_frame(&s, &tol()), s.matrix().determinant().norm() > 1e-12);
    }

    #[test]
    fn frame_operator_commutation_examples() {
        let g = ab(&[4]);
        let p = GaborPair::seeded(4, 1);
        let r = check_frame_op_commutes(&p, &Lattice::trivial(&g), &tol()).unwrap();
        assert_eq!(r.residuals["max-commutator"], 0.0);
        let r = check_frame_op_commutes(&p, &Lattice::full(&g), &tol()).unwrap();
        assert!(r.residuals["max-commutator"] <= 1e-12);
        let r = check_frame_op_commutes(&p, &self_adjoint_z4(), &tol()).unwrap();
        assert!(r.residuals["max-commutator"] <= 1e-10);
    }

    #[test]
    fn canonical_dual_examples() {
        let g = ab(&[4]);
        let p = GaborPair::seeded(4, 2);
        let d = canonical_dual(&p, &Lattice::full(&g), &tol()).unwrap();
        let k = p.pairing() * 4.0;
        assert!(linalg::max_abs_vec(&(d.tau().coeffs() - p.tau().coeffs() / k)) < 1e-12);
        assert!(linalg::max_abs_vec(&(d.f().coeffs() - p.f().coeffs() / k)) < 1e-12);

        let lam = self_adjoint_z4();
        let d = canonical_dual(&p, &lam, &tol()).unwrap();
        assert!(verify_dual(&p, &d, &lam, &tol()).unwrap().passed());

        // (f, S^{-1} tau) has identity frame operator and is its own dual.
        let normalized = GaborPair::new(p.f().clone(), d.tau().clone()).unwrap();
        let s = frame_operator(&normalized, &lam).unwrap();
        assert!(s.max_abs_diff(&LinOp::identity(4)) < 1e-10);
        let dd = canonical_dual(&normalized, &lam, &tol()).unwrap();
        assert!(linalg::max_abs_vec(&(dd.tau().coeffs() - normalized.tau().coeffs())) < 1e-10);
        assert!(linalg::max_abs_vec(&(dd.f().coeffs() - normalized.f().coeffs())) < 1e-10);

        let std = pair(unit(4, 0), unit(4, 0));
        assert!(matches!(canonical_dual(&std, &lam, &tol()), Err(Error::NotAFrame)));
    }

    #[test]
    fn janssen_examples() {
        for o in [2, 4] {
            let g = ab(&[o]);
            let p = GaborPair::seeded(o, 4);
            let d = janssen_decompose(&p, &Lattice::trivial(&g)).unwrap();
            assert_eq!(d.coeffs.len(), o * o);
            assert!(d.residual <= 1e-12);
            // by hand: S delta_j = f_j tau
            let mut manual = LinOp::zeros(o, o);
            for (mu, cm) in &d.coeffs {
                manual = manual.add(&tf_shift(&g, *mu).scale(*cm));
            }
            for j in 0..o {
                for i in 0..o {
                    let expect = p.f().coeffs()[j] * p.tau().coeffs()[i];
                    assert!((manual.get(i, j) - expect).norm() < 1e-12);
                }
            }
        }
        let g = ab(&[3]);
        let p = GaborPair::seeded(3, 5);
        let d = janssen_decompose(&p, &Lattice::full(&g)).unwrap();
        assert_eq!(d.coeffs.len(), 1);
        assert!((d.coeffs[0].1 - p.pairing() * 3.0).norm() < 1e-12);

        let r = check_janssen(&GaborPair::seeded(4, 6), &self_adjoint_z4(), &tol()).unwrap();
        assert!(r.passed());
        assert!(r.residuals["expansion"] <= 1e-10);
    }

    #[test]
    fn wexler_raz_examples() {
        let g = ab(&[2]);
        let full = Lattice::full(&g);
        for extra in [c(0.0, 0.0), c(0.3, -1.2), c(5.0, 0.0)] {
            let p = pair(unit(2, 0), vec![c(0.5, 0.0), extra]);
            let w = wexler_raz(&p, &full, &tol()).unwrap();
            assert!(w.biorthogonal && w.identity);
            assert!(wexler_raz_check(&p, &full, &tol()).unwrap().passed());
            assert!(ron_shen_check(&p, &full, &tol()).unwrap().passed());
        }
        let orth = pair(unit(2, 0), unit(2, 1));
        let w = wexler_raz(&orth, &full, &tol()).unwrap();
        assert!(!w.biorthogonal && !w.identity);
        let r = wexler_raz_check(&orth, &full, &tol()).unwrap();
        assert!(!r.passed());
        assert!(r.subcheck("equivalence").unwrap().passed());

        let lam = self_adjoint_z4();
        let mut rng = sample::rng(77);
        for _ in 0..20 {
            let p = GaborPair::random(4, &mut rng);
            assert!(wexler_raz(&p, &lam, &tol()).unwrap().agree());
        }
    }

    #[test]
    fn ron_shen_examples() {
        let g = ab(&[4]);
        let p = GaborPair::seeded(4, 8);
        let r = ron_shen_check(&p, &Lattice::full(&g), &tol()).unwrap();
        assert!(r.passed());
        let lam = self_adjoint_z4();
        let r = ron_shen_check(&p, &lam, &tol()).unwrap();
        assert!(r.passed());
        assert_eq!(r.witnesses["vector-rank"], Witness::Count(4));
        assert_eq!(r.witnesses["functional-rank"], Witness::Count(4));
        assert!(matches!(
            ron_shen_check(&p, &Lattice::trivial(&g), &tol()),
            Err(Error::NotAFrame)
        ));
    }

    #[test]
    fn hs_onb_examples() {
        let r = check_hs_onb(&ab(&[1]), &tol(), 16);
        assert!(r.passed());
        assert_eq!(r.witnesses["operators"], Witness::Count(1));
        let r = check_hs_onb(&ab(&[2]), &tol(), 16);
        assert!(r.passed() && r.residuals["gram"] == 0.0);
        let g = ab(&[2]);
        let shifts: Vec<LinOp> = phase_space(&g).map(|p| tf_shift(&g, p)).collect();
        for (a, sa) in shifts.iter().enumerate() {
            for (b, sb) in shifts.iter().enumerate() {
                // sum of entrywise products, written out
                let mut acc = c(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        acc += sa.get(i, j) * sb.get(i, j).conj();
                    }
                }
                assert_eq!(acc, c(if a == b { 2.0 } else { 0.0 }, 0.0));
            }
        }
        let r = check_hs_onb(&ab(&[2, 2]), &tol(), 16);
        assert!(r.passed());
        assert_eq!(r.witnesses["operators"], Witness::Count(16));
    }
}
