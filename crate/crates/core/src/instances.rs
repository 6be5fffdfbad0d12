//! Builders for test and demo instances: permutation groups, small
//! representations, group-generated p-USFs and perturbations of them.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, FiniteGroup};
use crate::linalg::{self, LinOp};
use crate::lp::{GFunctional, GVector, PNorm};
use crate::pusf::{self, AmbientNorm, FramePair, RepresentationFamily};
use crate::sample::{self, SeededRng};
use crate::C64;

/// A group given by permutations of `0..degree`, multiplied by composition
/// `(a b)(i) = a(b(i))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationGroup {
    group: FiniteGroup,
    perms: Vec<Vec<usize>>,
}

impl PermutationGroup {
    /// `perms` must be closed under composition.
    pub fn new(perms: Vec<Vec<usize>>, label: &str) -> Result<Self> {
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p);
        let mut rows = Vec::with_capacity(perms.len());
        for (a, pa) in perms.iter().enumerate() {
            let mut row = Vec::with_capacity(perms.len());
            for (b, pb) in perms.iter().enumerate() {
                let comp: Vec<usize> = pb.iter().map(|&i| pa[i]).collect();
                row.push(index(&comp).ok_or(Error::NotAGroup {
                    axiom: "closure",
                    a,
                    b,
                    c: a,
                })?);
            }
            rows.push(row);
        }
        let group = FiniteGroup::from_table(&rows)?.with_label(label);
        Ok(Self { group, perms })
    }

    /// All permutations of `0..n` in lexicographic order.
    pub fn symmetric(n: usize) -> Self {
        let mut perms = Vec::new();
        let mut p: Vec<usize> = (0..n).collect();
        loop {
            perms.push(p.clone());
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
            p.swap(i - 1, j);
            p[i..].reverse();
        }
        Self::new(perms, &format!("S{n}")).expect("symmetric group is closed")
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// `pi_g delta_i = delta_{g(i)}`.
    pub fn permutation_representation(&self) -> RepresentationFamily {
        let ops = self
            .perms
            .iter()
            .map(|p| LinOp::monomial(p, |_| C64::new(1.0, 0.0)))
            .collect();
        RepresentationFamily::new(ops).expect("nonempty")
    }

    /// The sign character as a representation on `C^1`.
    pub fn sign_representation(&self) -> RepresentationFamily {
        let ops = self
            .perms
            .iter()
            .map(|p| {
                let inversions = (0..p.len())
                    .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let s = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                LinOp::identity(1).scale(C64::new(s, 0.0))
            })
            .collect();
        RepresentationFamily::new(ops).expect("nonempty")
    }
}

/// `g -> xi_c(g)` on `C^1`.
pub fn character_representation(g: &AbelianGroup, c: usize) -> RepresentationFamily {
    let ops = (0..g.order())
        .map(|x| LinOp::identity(1).scale(g.char_value(c, x)))
        .collect();
    RepresentationFamily::new(ops).expect("nonempty")
}

/// `g -> diag(xi_{c_1}(g), ..., xi_{c_k}(g))`.
pub fn diagonal_character_representation(g: &AbelianGroup, cs: &[usize]) -> RepresentationFamily {
    let k = cs.len();
    let ops = (0..g.order())
        .map(|x| {
            LinOp::from_fn(k, k, |i, j| {
                if i == j {
                    g.char_value(cs[i], x)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    RepresentationFamily::new(ops).expect("nonempty")
}

/// Random permutation with random unit phases, and its inverse.
pub fn random_unimodular_monomial(n: usize, rng: &mut SeededRng) -> (LinOp, LinOp) {
    let mut target: Vec<usize> = (0..n).collect();
    target.shuffle(rng);
    let phases: Vec<C64> = (0..n).map(|_| sample::phase(rng)).collect();
    let p = LinOp::monomial(&target, |j| phases[j]);
    let inv = p.adjoint();
    (p, inv)
}

/// A random matrix with singular-value ratio at least `0.05`, and its
/// inverse.
pub fn random_well_conditioned(n: usize, rng: &mut SeededRng) -> (LinOp, LinOp) {
    loop {
        let m = sample::matrix(rng, n, n);
        if linalg::singular_ratio(&m) >= 0.05 {
            let inv = linalg::inverse(&m, 1e-12).expect("well conditioned");
            return (LinOp::new(m), LinOp::new(inv));
        }
    }
}

/// Group-generated pair from `(f0, tau0)`, with `tau0` replaced by
/// `S^{-1} tau0` where `S = sum_g pi_g tau0 (f0 pi_{g^{-1}})`. `S` commutes
/// with every `pi_g`, so the result reconstructs exactly.
pub fn normalized_group_pair(
    group: &FiniteGroup,
    rep: &RepresentationFamily,
    f0: &GFunctional,
    tau0: &GVector,
    p: PNorm,
    ambient: AmbientNorm,
) -> Result<FramePair> {
    let raw = FramePair::generated(group.clone(), rep, f0, tau0, p, ambient)?;
    let s = &pusf::synthesis_operator(&raw) * &pusf::analysis_operator(&raw);
    let s_inv = LinOp::new(linalg::inverse(s.matrix(), 1e-6)?);
    FramePair::generated(group.clone(), rep, f0, &tau0.mapped(&s_inv), p, ambient)
}

/// Which construction [`random_group_pusf`] used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupPairKind {
    /// `P lambda P^{-1}` for a unimodular monomial `P`, coordinate norm.
    ConjugatedRegular,
    /// `lambda` with random normalized generators, pullback norm.
    WeightedRegular,
    /// One of the supplied representations conjugated by a random matrix,
    /// pullback norm.
    Supplied(usize),
}

/// A random group-p-USF and the representation that generated it.
///
/// Fails with `NotInvertible` if a supplied representation has no cyclic
/// vector (some irreducible piece occurs more often than its dimension),
/// since then no single generator can reconstruct.
pub fn random_group_pusf(
    group: &FiniteGroup,
    supplied: &[RepresentationFamily],
    rng: &mut SeededRng,
) -> Result<(FramePair, RepresentationFamily, GroupPairKind)> {
    let ps = [1.0, 1.5, 2.0, 3.0];
    let p = PNorm::new(ps[rng.gen_range(0..ps.len())]).expect("valid");
    let n = group.order();
    let choice = rng.gen_range(0..2 + supplied.len());
    match choice {
        0 => {
            let (pm, pm_inv) = random_unimodular_monomial(n, rng);
            let rep = RepresentationFamily::left_regular(group).conjugated(&pm, &pm_inv);
            let e = group.identity();
            let f = GFunctional::coordinate(n, e).compose(&pm_inv);
            let tau = GVector::basis(n, e).mapped(&pm);
            let pair = FramePair::generated(group.clone(), &rep, &f, &tau, p, AmbientNorm::Coordinate(p))
                .expect("shapes agree");
            Ok((pair, rep, GroupPairKind::ConjugatedRegular))
        }
        1 => {
            let rep = RepresentationFamily::left_regular(group);
            let pair = random_normalized(group, &rep, p, rng)?;
            Ok((pair, rep, GroupPairKind::WeightedRegular))
        }
        k => {
            let base = &supplied[k - 2];
            let (a, a_inv) = random_well_conditioned(base.dim(), rng);
            let rep = base.conjugated(&a, &a_inv);
            let pair = random_normalized(group, &rep, p, rng)?;
            Ok((pair, rep, GroupPairKind::Supplied(k - 2)))
        }
    }
}

const NORMALIZE_ATTEMPTS: usize = 16;

fn random_normalized(
    group: &FiniteGroup,
    rep: &RepresentationFamily,
    p: PNorm,
    rng: &mut SeededRng,
) -> Result<FramePair> {
    let m = rep.dim();
    let mut last = Error::NotInvertible { ratio: 0.0 };
    for _ in 0..NORMALIZE_ATTEMPTS {
        let f0 = GFunctional::new(sample::vector(rng, m))?;
        let tau0 = GVector::new(sample::vector(rng, m))?;
        match normalized_group_pair(group, rep, &f0, &tau0, p, AmbientNorm::Pullback) {
            Ok(pair) => return Ok(pair),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Perturb the analysis operator by `eps` times a random matrix and take
/// the pseudo-inverse as synthesis; the result is again a p-USF for the
/// pullback norm but its families no longer come from a representation.
///
/// Needs `dim < o(G)`: a full-dimensional p-USF has Gramian `I`, which is
/// always a group matrix.
pub fn perturbed_pusf(pair: &FramePair, eps: f64, rng: &mut SeededRng) -> Result<FramePair> {
    let n = pair.group().order();
    let m = pair.dim();
    if m >= n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: m,
        });
    }
    let analysis = pusf::analysis_operator(pair).matrix() + sample::matrix(rng, n, m) * C64::new(eps, 0.0);
    let gram = analysis.adjoint() * &analysis;
    let synthesis = linalg::inverse(&gram, 1e-10)? * analysis.adjoint();
    FramePair::from_operators(
        pair.group().clone(),
        &LinOp::new(analysis),
        &LinOp::new(synthesis),
        pair.p(),
        AmbientNorm::Pullback,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pusf::{build_representation, check_shift_invariance, gramian, is_group_matrix, verify_p_usf};
    use crate::tolerance::Tolerances;

    #[test]
    fn symmetric_group_three() {
        let s3 = PermutationGroup::symmetric(3);
        assert_eq!(s3.group().order(), 6);
        assert!(!s3.group().is_abelian());
        assert_eq!(s3.perms()[0], vec![0, 1, 2]);
        let sign = s3.sign_representation();
        let signs: Vec<f64> = sign.ops().iter().map(|o| o.get(0, 0).re).collect();
        assert_eq!(signs, vec![1.0, -1.0, -1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn repeated_character_has_no_generator() {
        let g = AbelianGroup::cyclic(2).unwrap();
        let twice = diagonal_character_representation(&g, &[1, 1]);
        let mut rng = sample::rng(3);
        let mut failures = 0;
        for _ in 0..20 {
            if let Err(e) = random_group_pusf(g.group(), std::slice::from_ref(&twice), &mut rng) {
                assert!(matches!(e, Error::NotInvertible { .. }));
                failures += 1;
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn random_group_pusfs_verify() {
        let tol = Tolerances::default();
        let s3 = PermutationGroup::symmetric(3);
        let supplied = [s3.permutation_representation(), s3.sign_representation()];
        let mut rng = sample::rng(21);
        for _ in 0..12 {
            let (pair, _, kind) = random_group_pusf(s3.group(), &supplied, &mut rng).unwrap();
            assert!(verify_p_usf(&pair, &tol).passed(), "{kind:?}");
            assert!(check_shift_invariance(&pair, &tol).passed(), "{kind:?}");
            assert!(build_representation(&pair, &tol).is_ok(), "{kind:?}");

            if pair.dim() == 6 {
                assert!(perturbed_pusf(&pair, 0.2, &mut rng).is_err());
                continue;
            }
            let bent = perturbed_pusf(&pair, 0.2, &mut rng).unwrap();
            assert!(verify_p_usf(&bent, &tol).passed());
            assert!(is_group_matrix(bent.group(), &gramian(&bent).0, &tol).is_none());
            assert!(!check_shift_invariance(&bent, &tol).passed());
        }
    }
}
