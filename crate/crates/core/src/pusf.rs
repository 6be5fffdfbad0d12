//! Frame pairs indexed by a finite group: analysis and synthesis operators,
//! the Gramian, group matrices, rebuilding the generating representation,
//! and producing new pairs from commutant isometries.
//!
//! The abstract space `X` is `C^m`. Its norm is either the pullback
//! `||x|| = ||theta_f x||_p` (the analysis map is then an isometry by
//! construction, and only injectivity needs checking) or a coordinate
//! `l^q` norm, in which case isometry is decided exactly where possible
//! and sampled on the probe set otherwise.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{self, LinOp};
use crate::lp::{
    self, classify_lp_isometry, commutant, left_regular, p_norm_raw, right_regular, GFunctional, GVector,
    IsometryVerdict, PNorm,
};
use crate::report::{VerificationReport, Witness};
use crate::tolerance::Tolerances;
use crate::C64;

/// How the ambient space `X = C^m` is normed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmbientNorm {
    /// `||x|| = ||theta_f x||_p`.
    Pullback,
    /// `||x|| = ||x||_q` on coordinates.
    Coordinate(PNorm),
}

/// Functionals `f_g` and vectors `tau_g` on `X = C^m`, indexed by `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePair {
    group: FiniteGroup,
    functionals: Vec<GFunctional>,
    vectors: Vec<GVector>,
    p: PNorm,
    ambient: AmbientNorm,
    dim: usize,
}

impl FramePair {
    pub fn new(
        group: FiniteGroup,
        functionals: Vec<GFunctional>,
        vectors: Vec<GVector>,
        p: PNorm,
        ambient: AmbientNorm,
    ) -> Result<Self> {
        let n = group.order();
        for len in [functionals.len(), vectors.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let dim = functionals[0].len();
        for len in functionals
            .iter()
            .map(GFunctional::len)
            .chain(vectors.iter().map(GVector::len))
        {
            if len != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: len,
                });
            }
        }
        Ok(Self {
            group,
            functionals,
            vectors,
            p,
            ambient,
            dim,
        })
    }

    /// `(zeta_g, delta_g)` on `l^p(G)`.
    pub fn standard(group: FiniteGroup, p: PNorm) -> Self {
        let n = group.order();
        let functionals = (0..n).map(|g| GFunctional::coordinate(n, g)).collect();
        let vectors = (0..n).map(|g| GVector::basis(n, g)).collect();
        Self::new(group, functionals, vectors, p, AmbientNorm::Coordinate(p)).expect("standard pair is well formed")
    }

    /// `f_g = zeta_g U`, `tau_g = V delta_g` for `U: X -> l^p(G)` and
    /// `V: l^p(G) -> X`.
    pub fn from_operators(
        group: FiniteGroup,
        analysis: &LinOp,
        synthesis: &LinOp,
        p: PNorm,
        ambient: AmbientNorm,
    ) -> Result<Self> {
        let n = group.order();
        if analysis.nrows() != n || synthesis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if analysis.nrows() != n {
                    analysis.nrows()
                } else {
                    synthesis.ncols()
                },
            });
        }
        if analysis.ncols() != synthesis.nrows() {
            return Err(Error::DimensionMismatch {
                expected: analysis.ncols(),
                found: synthesis.nrows(),
            });
        }
        let functionals = (0..n)
            .map(|g| GFunctional::new(analysis.matrix().row(g).transpose()))
            .collect::<Result<_>>()?;
        let vectors = (0..n)
            .map(|g| GVector::new(synthesis.matrix().column(g).into_owned()))
            .collect::<Result<_>>()?;
        Self::new(group, functionals, vectors, p, ambient)
    }

    /// `f_g = f pi_{g^{-1}}`, `tau_g = pi_g tau`.
    pub fn generated(
        group: FiniteGroup,
        rep: &RepresentationFamily,
        f: &GFunctional,
        tau: &GVector,
        p: PNorm,
        ambient: AmbientNorm,
    ) -> Result<Self> {
        if rep.ops.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                found: rep.ops.len(),
            });
        }
        if f.len() != rep.dim() || tau.len() != rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.dim(),
                found: if f.len() != rep.dim() { f.len() } else { tau.len() },
            });
        }
        let functionals = (0..group.order()).map(|g| f.compose(&rep.ops[group.inv(g)])).collect();
        let vectors = rep.ops.iter().map(|op| tau.mapped(op)).collect();
        Self::new(group, functionals, vectors, p, ambient)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn functionals(&self) -> &[GFunctional] {
        &self.functionals
    }

    pub fn vectors(&self) -> &[GVector] {
        &self.vectors
    }

    pub fn functional(&self, g: usize) -> &GFunctional {
        &self.functionals[g]
    }

    pub fn vector(&self, g: usize) -> &GVector {
        &self.vectors[g]
    }

    pub fn p(&self) -> PNorm {
        self.p
    }

    pub fn ambient(&self) -> AmbientNorm {
        self.ambient
    }

    pub fn with_ambient(mut self, ambient: AmbientNorm) -> Self {
        self.ambient = ambient;
        self
    }

    /// Dimension `m` of the ambient space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_norm(&self, x: &DVector<C64>) -> f64 {
        match self.ambient {
            AmbientNorm::Pullback => p_norm_raw(&analysis_operator(self).apply(x), self.p),
            AmbientNorm::Coordinate(q) => p_norm_raw(x, q),
        }
    }

    /// Basis of `X`, identity-indexed vector first when `X = l^p(G)`.
    fn ambient_basis_order(&self) -> Vec<usize> {
        if self.dim == self.group.order() {
            self.group.elements_identity_first().collect()
        } else {
            (0..self.dim).collect()
        }
    }
}

/// `theta_f x = (f_g(x))_g`: row `g` holds the coefficients of `f_g`.
pub fn analysis_operator(pair: &FramePair) -> LinOp {
    LinOp::from_fn(pair.group.order(), pair.dim, |g, i| pair.functionals[g].coeffs()[i])
}

/// `theta_tau a = sum_g a_g tau_g`: column `g` is `tau_g`.
pub fn synthesis_operator(pair: &FramePair) -> LinOp {
    LinOp::from_fn(pair.dim, pair.group.order(), |i, g| pair.vectors[g].coeffs()[i])
}

/// Result of testing an operator on `X` for isometry under the pair's norm.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometryCheck {
    pub isometry: bool,
    pub deviation: f64,
    pub witness: Option<DVector<C64>>,
    /// Whether the verdict came from an exact test rather than probing.
    pub exact: bool,
}

/// Is `a: X -> X` an invertible isometry of the pair's ambient norm?
pub fn ambient_isometry(pair: &FramePair, a: &LinOp, tol: &Tolerances) -> IsometryCheck {
    let m = pair.dim;
    let from_verdict = |v: Result<IsometryVerdict>| match v {
        Ok(IsometryVerdict::Isometry) => IsometryCheck {
            isometry: true,
            deviation: 0.0,
            witness: None,
            exact: true,
        },
        Ok(IsometryVerdict::NotIsometry { witness, deviation }) => IsometryCheck {
            isometry: false,
            deviation,
            witness: Some(witness.coeffs().clone()),
            exact: true,
        },
        Err(_) => IsometryCheck {
            isometry: false,
            deviation: f64::INFINITY,
            witness: None,
            exact: true,
        },
    };
    if a.nrows() != m || a.ncols() != m || !linalg::is_invertible(a.matrix(), tol.rank) {
        return from_verdict(Err(Error::NotInvertible { ratio: 0.0 }));
    }
    match pair.ambient {
        AmbientNorm::Coordinate(q) => from_verdict(classify_lp_isometry(a, q, tol)),
        AmbientNorm::Pullback => {
            let theta_f = analysis_operator(pair);
            if m == pair.group.order() {
                match linalg::inverse(theta_f.matrix(), tol.rank) {
                    Ok(inv) => {
                        let transported = &(&theta_f * a) * &LinOp::new(inv);
                        from_verdict(classify_lp_isometry(&transported, pair.p, tol))
                    }
                    Err(e) => from_verdict(Err(e)),
                }
            } else if pair.p.is_two() {
                let gram = &theta_f.adjoint() * &theta_f;
                let pulled = &(&a.adjoint() * &gram) * a;
                let dev = pulled.max_abs_diff(&gram);
                IsometryCheck {
                    isometry: dev <= tol.scaled(gram.max_abs()),
                    deviation: dev,
                    witness: None,
                    exact: true,
                }
            } else {
                let (dev, x) = lp::probe_norm_deviation(m, tol.residual, |x| {
                    let base = p_norm_raw(&theta_f.apply(x), pair.p);
                    if base == 0.0 {
                        return f64::INFINITY;
                    }
                    (p_norm_raw(&theta_f.apply(&a.apply(x)), pair.p) / base - 1.0).abs()
                });
                IsometryCheck {
                    isometry: dev <= tol.residual,
                    deviation: dev,
                    witness: (dev > tol.residual).then_some(x),
                    exact: false,
                }
            }
        }
    }
}

/// Reconstruction `theta_tau theta_f = I`, isometry of `theta_f`, and
/// idempotency of the Gramian.
pub fn verify_p_usf(pair: &FramePair, tol: &Tolerances) -> VerificationReport {
    let label = pair.group.label();
    let mut report = VerificationReport::new("p-usf", label, *tol);
    let theta_f = analysis_operator(pair);
    let theta_tau = synthesis_operator(pair);
    let m = pair.dim;

    let mut recon = VerificationReport::new("reconstruction", label, *tol);
    let composed = &theta_tau * &theta_f;
    let defect = composed.sub(&LinOp::identity(m));
    let mut worst = (0.0, 0);
    for i in pair.ambient_basis_order() {
        let col = defect.matrix().column(i).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if col > worst.0 {
            worst = (col, i);
        }
    }
    if !recon.bound("max-defect", worst.0, tol.scaled(composed.max_abs())) {
        recon.witness("x", Witness::vector(GVector::basis(m, worst.1).coeffs().iter()));
        recon.witness("basis-index", Witness::Indices(vec![worst.1]));
    }
    report.push(recon);

    report.push(analysis_isometry_report(pair, &theta_f, tol));

    let mut proj = VerificationReport::new("gramian-projection", label, *tol);
    let gram = &theta_f * &theta_tau;
    let sq = &gram * &gram;
    proj.bound("idempotency", sq.max_abs_diff(&gram), tol.scaled(gram.max_abs()));
    report.push(proj);
    report
}

fn analysis_isometry_report(pair: &FramePair, theta_f: &LinOp, tol: &Tolerances) -> VerificationReport {
    let mut r = VerificationReport::new("analysis-isometry", pair.group.label(), *tol);
    let m = pair.dim;
    let n = pair.group.order();
    match pair.ambient {
        AmbientNorm::Pullback => {
            // Isometric by definition; it is a norm iff theta_f is injective.
            let rank = linalg::rank(theta_f.matrix(), tol.rank);
            r.witness("method", Witness::Text("pullback-injectivity".into()));
            r.witness("rank", Witness::Count(rank));
            r.bound("rank-deficit", (m - rank) as f64, 0.0);
        }
        AmbientNorm::Coordinate(q) if q == pair.p && m == n => {
            r.witness("method", Witness::Text("structural".into()));
            match classify_lp_isometry(theta_f, pair.p, tol) {
                Ok(IsometryVerdict::Isometry) => r.record("deviation", 0.0),
                Ok(IsometryVerdict::NotIsometry { witness, deviation }) => {
                    r.record("deviation", deviation);
                    r.fail_with("x", Witness::vector(witness.coeffs().iter()));
                }
                Err(_) => r.fail_with("not-invertible", Witness::Flag(true)),
            }
        }
        AmbientNorm::Coordinate(q) if q.is_two() && pair.p.is_two() => {
            r.witness("method", Witness::Text("gram".into()));
            let gram = &theta_f.adjoint() * theta_f;
            r.bound("gram-defect", gram.max_abs_diff(&LinOp::identity(m)), tol.residual);
        }
        AmbientNorm::Coordinate(q) => {
            r.witness("method", Witness::Text("probe-set".into()));
            let (dev, x) = lp::probe_norm_deviation(m, tol.residual, |x| {
                (p_norm_raw(&theta_f.apply(x), pair.p) / p_norm_raw(x, q) - 1.0).abs()
            });
            if !r.bound("deviation", dev, tol.residual) {
                r.witness("x", Witness::vector(x.iter()));
            }
        }
    }
    r
}

/// The matrix `[f_g(tau_h)]_{g,h}`, equal to `theta_f theta_tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gramian(pub LinOp);

impl Gramian {
    pub fn matrix(&self) -> &LinOp {
        &self.0
    }
}

pub fn gramian(pair: &FramePair) -> Gramian {
    let n = pair.group.order();
    Gramian(LinOp::from_fn(n, n, |g, h| pair.functionals[g].eval(&pair.vectors[h])))
}

/// `nu` with `a_{g,h} = nu(g^{-1} h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMatrixWitness {
    pub nu: Vec<C64>,
    pub residual: f64,
}

/// `max |a_{g,h} - a_{e, g^{-1} h}|` and the `(g, h)` achieving it.
pub fn group_matrix_residual(group: &FiniteGroup, m: &LinOp) -> (f64, [usize; 2]) {
    let e = group.identity();
    let n = group.order();
    let mut worst = (0.0, [e, e]);
    for g in 0..n {
        for h in 0..n {
            let d = (m.get(g, h) - m.get(e, group.op(group.inv(g), h))).norm();
            if d > worst.0 {
                worst = (d, [g, h]);
            }
        }
    }
    worst
}

/// Accept `m` as a group matrix, reading `nu` off the identity row.
pub fn is_group_matrix(group: &FiniteGroup, m: &LinOp, tol: &Tolerances) -> Option<GroupMatrixWitness> {
    let n = group.order();
    if m.nrows() != n || m.ncols() != n {
        return None;
    }
    let (residual, _) = group_matrix_residual(group, m);
    (residual <= tol.scaled(m.max_abs())).then(|| GroupMatrixWitness {
        nu: (0..n).map(|h| m.get(group.identity(), h)).collect(),
        residual,
    })
}

/// `f_{ug}(tau_{uh}) = f_g(tau_h)` for all `u, g, h`, cross-checked against
/// the group-matrix test on the Gramian.
pub fn check_shift_invariance(pair: &FramePair, tol: &Tolerances) -> VerificationReport {
    let group = &pair.group;
    let n = group.order();
    let gram = gramian(pair).0;
    let mut report = VerificationReport::new("shift-invariance", group.label(), *tol);
    let mut worst = (0.0, [0, 0, 0]);
    for u in 0..n {
        for g in 0..n {
            for h in 0..n {
                let d = (gram.get(group.op(u, g), group.op(u, h)) - gram.get(g, h)).norm();
                if d > worst.0 {
                    worst = (d, [u, g, h]);
                }
            }
        }
    }
    if !report.bound("triple-identity", worst.0, tol.scaled(gram.max_abs())) {
        report.witness("u-g-h", Witness::Indices(worst.1.to_vec()));
    }
    let (gm, at) = group_matrix_residual(group, &gram);
    report.record("group-matrix", gm);
    let accepted = is_group_matrix(group, &gram, tol).is_some();
    report.witness("group-matrix-accepts", Witness::Flag(accepted));
    if !accepted {
        report.witness("group-matrix-g-h", Witness::Indices(at.to_vec()));
    }
    report
}

/// Operators `pi_g` on `X`, indexed by group element.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationFamily {
    ops: Vec<LinOp>,
}

impl RepresentationFamily {
    pub fn new(ops: Vec<LinOp>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyOperatorList)?;
        let m = first.nrows();
        for op in &ops {
            if op.nrows() != m || op.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: op.nrows().max(op.ncols()),
                });
            }
        }
        Ok(Self { ops })
    }

    /// `lambda` on `l^p(G)`.
    pub fn left_regular(group: &FiniteGroup) -> Self {
        Self {
            ops: lp::left_regular_all(group),
        }
    }

    /// `g -> P pi_g P^{-1}`.
    pub fn conjugated(&self, p: &LinOp, p_inv: &LinOp) -> Self {
        Self {
            ops: self.ops.iter().map(|op| &(p * op) * p_inv).collect(),
        }
    }

    pub fn ops(&self) -> &[LinOp] {
        &self.ops
    }

    pub fn op(&self, g: usize) -> &LinOp {
        &self.ops[g]
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }
}

/// `pi_g = theta_tau lambda_g theta_f`, after confirming the pair is a
/// p-USF with shift-invariant Gramian; the result is verified before it is
/// returned.
pub fn build_representation(pair: &FramePair, tol: &Tolerances) -> Result<RepresentationFamily> {
    let usf = verify_p_usf(pair, tol);
    if !usf.passed() {
        return Err(Error::PreconditionFailed(Box::new(usf)));
    }
    let shift = check_shift_invariance(pair, tol);
    if !shift.passed() {
        return Err(Error::PreconditionFailed(Box::new(shift)));
    }
    let rep = representation_from_operators(pair);
    let check = verify_representation(pair, &rep, tol);
    if !check.passed() {
        return Err(Error::PostconditionFailed(Box::new(check)));
    }
    Ok(rep)
}

/// `theta_tau lambda_g theta_f` without any precondition checks.
pub fn representation_from_operators(pair: &FramePair) -> RepresentationFamily {
    let theta_f = analysis_operator(pair);
    let theta_tau = synthesis_operator(pair);
    let ops = (0..pair.group.order())
        .map(|g| &(&theta_tau * &left_regular(&pair.group, g)) * &theta_f)
        .collect();
    RepresentationFamily { ops }
}

/// Homomorphism, inverses, isometry of each `pi_g`, and regeneration of
/// the families from `(f_e, tau_e)`.
pub fn verify_representation(pair: &FramePair, rep: &RepresentationFamily, tol: &Tolerances) -> VerificationReport {
    let group = &pair.group;
    let n = group.order();
    let m = pair.dim;
    let label = group.label();
    let mut report = VerificationReport::new("representation", label, *tol);
    let scale = rep.ops.iter().map(LinOp::max_abs).fold(0.0, f64::max);
    let thr = tol.scaled(scale * scale);

    let mut hom = VerificationReport::new("homomorphism", label, *tol);
    let mut worst = (0.0, [0, 0]);
    for g in 0..n {
        for h in 0..n {
            let d = (&rep.ops[g] * &rep.ops[h]).max_abs_diff(&rep.ops[group.op(g, h)]);
            if d > worst.0 {
                worst = (d, [g, h]);
            }
        }
    }
    if !hom.bound("max-defect", worst.0, thr) {
        hom.witness("g-h", Witness::Indices(worst.1.to_vec()));
    }
    report.push(hom);

    let mut inv = VerificationReport::new("invertibility", label, *tol);
    let id = LinOp::identity(m);
    let mut worst = (0.0, 0);
    for g in 0..n {
        let gi = &rep.ops[group.inv(g)];
        let d = (&rep.ops[g] * gi)
            .max_abs_diff(&id)
            .max((gi * &rep.ops[g]).max_abs_diff(&id));
        if d > worst.0 {
            worst = (d, g);
        }
    }
    if !inv.bound("max-defect", worst.0, thr) {
        inv.witness("g", Witness::Indices(vec![worst.1]));
    }
    report.push(inv);

    let mut iso = VerificationReport::new("isometry", label, *tol);
    let mut worst = 0.0f64;
    let mut offenders = Vec::new();
    for (g, op) in rep.ops.iter().enumerate() {
        let c = ambient_isometry(pair, op, tol);
        if c.deviation.is_finite() {
            worst = worst.max(c.deviation);
        } else {
            worst = f64::INFINITY;
        }
        if !c.isometry {
            offenders.push(g);
        }
    }
    iso.record("max-deviation", worst);
    if !offenders.is_empty() {
        iso.fail_with("not-isometric", Witness::Indices(offenders));
    }
    report.push(iso);

    let mut gen = VerificationReport::new("generation", label, *tol);
    let e = group.identity();
    let tau_e = pair.vectors[e].coeffs();
    let f_e = &pair.functionals[e];
    let mut vec_defect = 0.0f64;
    let mut fun_defect = 0.0f64;
    for g in 0..n {
        let tg = rep.ops[g].apply(tau_e);
        vec_defect = vec_defect.max(linalg::max_abs_vec(&(tg - pair.vectors[g].coeffs())));
        let fg = f_e.compose(&rep.ops[group.inv(g)]);
        fun_defect = fun_defect.max(linalg::max_abs_vec(&(fg.coeffs() - pair.functionals[g].coeffs())));
    }
    gen.bound("vector-defect", vec_defect, thr);
    gen.bound("functional-defect", fun_defect, thr);
    report.push(gen);
    report
}

/// `max_g ||lambda_g G - G lambda_g||`.
pub fn check_gramian_commutes_left_regular(pair: &FramePair, tol: &Tolerances) -> VerificationReport {
    let group = &pair.group;
    let gram = gramian(pair).0;
    let mut report = VerificationReport::new("gramian-commutes-left-regular", group.label(), *tol);
    let mut worst = (0.0, 0);
    for g in 0..group.order() {
        let d = left_regular(group, g).commutator(&gram).max_abs();
        if d > worst.0 {
            worst = (d, g);
        }
    }
    if !report.bound("max-commutator", worst.0, tol.scaled(gram.max_abs())) {
        report.witness("g", Witness::Indices(vec![worst.1]));
    }
    report
}

/// `G = sum_g eta(g) rho_g`.
#[derive(Clone, Debug, PartialEq)]
pub struct RightRegularDecomposition {
    pub eta: Vec<C64>,
    pub residual: f64,
    /// `max_g |eta(g) - f_e(pi_g tau_e)|` when a representation was supplied.
    pub representation_defect: Option<f64>,
}

/// Expand the Gramian in the right regular representation; `None` if the
/// expansion does not reproduce it (or disagrees with the supplied
/// representation).
pub fn gramian_right_regular_decomposition(
    pair: &FramePair,
    rep: Option<&RepresentationFamily>,
    tol: &Tolerances,
) -> Option<RightRegularDecomposition> {
    let group = &pair.group;
    let n = group.order();
    let e = group.identity();
    let gram = gramian(pair).0;
    // (sum_g eta(g) rho_g)[e][h] = eta(h)
    let eta: Vec<C64> = (0..n).map(|g| gram.get(e, g)).collect();
    let mut expansion = LinOp::zeros(n, n);
    for (g, &c) in eta.iter().enumerate() {
        expansion = expansion.add(&right_regular(group, g).scale(c));
    }
    let residual = expansion.max_abs_diff(&gram);
    let thr = tol.scaled(gram.max_abs());
    if residual > thr {
        return None;
    }
    let representation_defect = rep.map(|rep| {
        let tau_e = pair.vectors[e].coeffs();
        (0..n)
            .map(|g| (eta[g] - pair.functionals[e].eval_raw(&rep.ops[g].apply(tau_e))).norm())
            .fold(0.0, f64::max)
    });
    if representation_defect.is_some_and(|d| d > thr) {
        return None;
    }
    Some(RightRegularDecomposition {
        eta,
        residual,
        representation_defect,
    })
}

/// `lambda_g theta_f = theta_f pi_g` for all `g`.
pub fn check_intertwining(pair: &FramePair, rep: &RepresentationFamily, tol: &Tolerances) -> VerificationReport {
    let group = &pair.group;
    let theta_f = analysis_operator(pair);
    let mut report = VerificationReport::new("intertwining", group.label(), *tol);
    if rep.ops.len() != group.order() || rep.dim() != pair.dim {
        report.fail_with("shape-mismatch", Witness::Flag(true));
        return report;
    }
    let mut worst = (0.0, 0);
    for g in 0..group.order() {
        let d = (&left_regular(group, g) * &theta_f).max_abs_diff(&(&theta_f * &rep.ops[g]));
        if d > worst.0 {
            worst = (d, g);
        }
    }
    let scale = theta_f.max_abs() * rep.ops.iter().map(LinOp::max_abs).fold(1.0, f64::max);
    if !report.bound("max-defect", worst.0, tol.scaled(scale)) {
        report.witness("g", Witness::Indices(vec![worst.1]));
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitMode {
    Commutant,
    DoubleCommutant,
}

/// Move the generating pair `(f_e, tau_e)` to `(f_e u^{-1}, u tau_e)` for an
/// isometry `u` in `pi(G)'` or `pi(G)''`, and expand through `rep`.
pub fn orbit_pair(
    pair: &FramePair,
    rep: &RepresentationFamily,
    u: &LinOp,
    mode: OrbitMode,
    tol: &Tolerances,
) -> Result<FramePair> {
    let m = pair.dim;
    if u.nrows() != m || u.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: u.nrows().max(u.ncols()),
        });
    }
    let u_inv = LinOp::new(linalg::inverse(u.matrix(), tol.rank)?);
    let iso = ambient_isometry(pair, u, tol);
    if !iso.isometry {
        return Err(Error::NotIsometry {
            deviation: iso.deviation,
        });
    }
    let mut basis = commutant(rep.ops(), tol.rank)?;
    if mode == OrbitMode::DoubleCommutant {
        basis = commutant(&basis, tol.rank)?;
    }
    let residual = lp::span_containment(&basis, std::slice::from_ref(u), tol.rank);
    if residual > tol.residual {
        return Err(Error::NotInCommutant { residual });
    }

    let e = pair.group.identity();
    let f = pair.functionals[e].compose(&u_inv);
    let tau = pair.vectors[e].mapped(u);
    let moved = FramePair::generated(pair.group.clone(), rep, &f, &tau, pair.p, pair.ambient)?;

    let usf = verify_p_usf(&moved, tol);
    if !usf.passed() {
        return Err(Error::PostconditionFailed(Box::new(usf)));
    }
    let shift = check_shift_invariance(&moved, tol);
    if !shift.passed() {
        return Err(Error::PostconditionFailed(Box::new(shift)));
    }
    Ok(moved)
}

/// Rows `f_g` as a dense matrix, for comparisons.
pub fn functional_matrix(pair: &FramePair) -> DMatrix<C64> {
    analysis_operator(pair).into_matrix()
}
