//! Dispatch from a validated job to the checks in `schauder-core`.

use num_complex::Complex64;

use schauder_core::gabor::{self, GaborPair, Lattice};
use schauder_core::group::check_character_orthogonality;
use schauder_core::instances::random_group_pusf;
use schauder_core::linalg::LinOp;
use schauder_core::lp::{self, GFunctional, GVector, PNorm};
use schauder_core::pusf::{self, AmbientNorm, FramePair, OrbitMode};
use schauder_core::{AbelianGroup, Error, VerificationReport, Witness};

use crate::config::{AmbientSpec, Command, JobConfig, NamedOperator, OperatorSpec, OrbitModeSpec, PairSpec};
use crate::error::CliError;

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub verify_adjoint_by_matrices: bool,
}

/// Seed used when neither the config nor the command line names one.
pub const DEFAULT_SEED: u64 = 0;

pub fn run_command(cfg: &JobConfig, opts: &RunOptions) -> Result<VerificationReport, CliError> {
    let mut tol = cfg.tolerances;
    if let Some(t) = opts.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::validation("--tolerance", "must be positive and finite"));
        }
        tol.residual = t;
    }
    let run_seed = opts.seed.or(cfg.seed);
    let pair_seed = match cfg.pair {
        PairSpec::SeededRandom(s) => Some(s.or(run_seed).unwrap_or(DEFAULT_SEED)),
        _ => None,
    };
    let group = &cfg.group.group;
    let label = group.label().to_string();

    let outcome: Result<VerificationReport, Error> = match cfg.command {
        Command::GroupInfo => Ok(group_info(cfg, &tol)),
        Command::CharacterOrthogonality => Ok(check_character_orthogonality(abelian(cfg), &tol)),
        Command::CommutationTheorem => Ok(lp::check_commutation_theorem(group, &tol, cfg.order_limit)),
        Command::CheckPusf => frame_pair(cfg, pair_seed).map(|p| pusf::verify_p_usf(&p, &tol)),
        Command::CheckGroupframe => frame_pair(cfg, pair_seed).map(|p| groupframe(&p, &tol)),
        Command::OrbitPair => frame_pair(cfg, pair_seed).and_then(|p| orbit(cfg, &p, &tol)),
        Command::TfCommutation => Ok(gabor::check_tf_commutation(abelian(cfg), &tol, cfg.order_limit)),
        Command::HsOnb => Ok(gabor::check_hs_onb(abelian(cfg), &tol, cfg.order_limit)),
        Command::Moyal => gabor_pair(cfg, pair_seed).and_then(|p| gabor::moyal_check(abelian(cfg), &p, &tol)),
        Command::Inversion => gabor_pair(cfg, pair_seed).and_then(|p| {
            let g = abelian(cfg);
            let xs = match &cfg.x {
                Some(x) => vec![GVector::from_vec(x.clone())?],
                None => (0..g.order()).map(|i| GVector::basis(g.order(), i)).collect(),
            };
            gabor::check_inversion(g, &p, &xs, &tol)
        }),
        Command::AdjointLattice => {
            lattice(cfg).map(|lam| gabor::check_adjoint_lattice(&lam, opts.verify_adjoint_by_matrices, &tol))
        }
        Command::FrameCheck => with_lattice(cfg, pair_seed, |p, lam| gabor::frame_check(p, lam, &tol)),
        Command::GaborDual => with_lattice(cfg, pair_seed, |p, lam| {
            let dual = gabor::canonical_dual(p, lam, &tol)?;
            gabor::verify_dual(p, &dual, lam, &tol)
        }),
        Command::Janssen => with_lattice(cfg, pair_seed, |p, lam| gabor::check_janssen(p, lam, &tol)),
        Command::WexlerRaz => with_lattice(cfg, pair_seed, |p, lam| gabor::wexler_raz_check(p, lam, &tol)),
        Command::RonShen => with_lattice(cfg, pair_seed, |p, lam| gabor::ron_shen_check(p, lam, &tol)),
    };

    let report = match outcome {
        Ok(r) => r,
        Err(e) => failed_from_error(cfg.command, &label, &tol, e)?,
    };
    Ok(match pair_seed.or(run_seed) {
        Some(s) => report.with_seed(s),
        None => report,
    })
}

/// Exit status: 0 iff the report passed.
pub fn exit_status(report: &VerificationReport) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}

/// Core errors that describe the job rather than the mathematics are config
/// errors; the rest become failed reports carrying the reason.
fn failed_from_error(
    command: Command,
    label: &str,
    tol: &schauder_core::Tolerances,
    e: Error,
) -> Result<VerificationReport, CliError> {
    match e {
        Error::DimensionMismatch { .. }
        | Error::InvalidElement { .. }
        | Error::NonFinite(_)
        | Error::ZeroGenerator(_)
        | Error::InvalidExponent(_)
        | Error::NotClosed { .. } => Err(CliError::validation("config", e)),
        Error::PreconditionFailed(sub) | Error::PostconditionFailed(sub) => {
            let mut r = VerificationReport::new(command.name(), label, *tol);
            r.witness("error", Witness::Text(format!("{} failed", sub.check)));
            r.push(*sub);
            Ok(r)
        }
        other => {
            let mut r = VerificationReport::new(command.name(), label, *tol);
            r.fail_with("error", Witness::Text(other.to_string()));
            Ok(r)
        }
    }
}

fn abelian(cfg: &JobConfig) -> &AbelianGroup {
    cfg.group
        .abelian
        .as_ref()
        .expect("validated: abelian commands have abelian groups")
}

fn group_info(cfg: &JobConfig, tol: &schauder_core::Tolerances) -> VerificationReport {
    let g = &cfg.group.group;
    let mut r = VerificationReport::new("group-info", g.label(), *tol);
    r.witness("order", Witness::Count(g.order()));
    r.witness("identity", Witness::Indices(vec![g.identity()]));
    r.witness("inverses", Witness::Indices(g.inverses().to_vec()));
    r.witness("abelian", Witness::Flag(g.is_abelian()));
    if let Some(ab) = &cfg.group.abelian {
        r.witness("cyclic-orders", Witness::Indices(ab.orders().to_vec()));
        r.witness("character-period", Witness::Count(ab.period()));
    }
    r
}

fn ambient_norm(cfg: &JobConfig, default: AmbientNorm) -> Result<AmbientNorm, Error> {
    Ok(match &cfg.ambient {
        None => default,
        Some(AmbientSpec::Pullback) => AmbientNorm::Pullback,
        Some(AmbientSpec::Coordinate(None)) => AmbientNorm::Coordinate(cfg.p),
        Some(AmbientSpec::Coordinate(Some(q))) => AmbientNorm::Coordinate(PNorm::new(*q)?),
    })
}

/// Frame pair for the group-frame commands. Explicit families win; a
/// generating pair is expanded through the left regular representation.
fn frame_pair(cfg: &JobConfig, seed: Option<u64>) -> Result<FramePair, Error> {
    let g = &cfg.group.group;
    if let Some(fam) = &cfg.families {
        let f = fam
            .f
            .iter()
            .map(|c| GFunctional::from_vec(c.clone()))
            .collect::<Result<_, _>>()?;
        let t = fam
            .tau
            .iter()
            .map(|c| GVector::from_vec(c.clone()))
            .collect::<Result<_, _>>()?;
        let ambient = ambient_norm(cfg, AmbientNorm::Pullback)?;
        return FramePair::new(g.clone(), f, t, cfg.p, ambient);
    }
    let coordinate = AmbientNorm::Coordinate(cfg.p);
    match &cfg.pair {
        PairSpec::Standard => Ok(FramePair::standard(g.clone(), cfg.p).with_ambient(ambient_norm(cfg, coordinate)?)),
        PairSpec::Explicit { f, tau } => {
            let rep = pusf::RepresentationFamily::left_regular(g);
            let f = GFunctional::from_vec(f.clone())?;
            let tau = GVector::from_vec(tau.clone())?;
            FramePair::generated(g.clone(), &rep, &f, &tau, cfg.p, ambient_norm(cfg, coordinate)?)
        }
        PairSpec::SeededRandom(_) => {
            let mut rng = schauder_core::sample::rng(seed.unwrap_or(DEFAULT_SEED));
            let (pair, _, _) = random_group_pusf(g, &[], &mut rng)?;
            Ok(pair)
        }
    }
}

fn groupframe(pair: &FramePair, tol: &schauder_core::Tolerances) -> VerificationReport {
    let g = pair.group();
    let mut r = VerificationReport::new("check-groupframe", g.label(), *tol);
    r.push(pusf::check_shift_invariance(pair, tol));

    let gram = pusf::gramian(pair).0;
    let mut gm = VerificationReport::new("group-matrix", g.label(), *tol);
    match pusf::is_group_matrix(g, &gram, tol) {
        Some(w) => {
            gm.record("residual", w.residual);
            gm.witness("nu", Witness::vector(w.nu.iter()));
        }
        None => {
            let (res, at) = pusf::group_matrix_residual(g, &gram);
            gm.record("residual", res);
            gm.fail_with("g-h", Witness::Indices(at.to_vec()));
        }
    }
    r.push(gm);
    r.push(pusf::check_gramian_commutes_left_regular(pair, tol));

    match pusf::build_representation(pair, tol) {
        Ok(rep) => {
            r.push(pusf::verify_representation(pair, &rep, tol));
            r.push(pusf::check_intertwining(pair, &rep, tol));
            let mut dec = VerificationReport::new("right-regular-decomposition", g.label(), *tol);
            match pusf::gramian_right_regular_decomposition(pair, Some(&rep), tol) {
                Some(d) => {
                    dec.record("residual", d.residual);
                    if let Some(rd) = d.representation_defect {
                        dec.record("representation-defect", rd);
                    }
                    dec.witness("eta", Witness::vector(d.eta.iter()));
                }
                None => dec.fail_with("accepted", Witness::Flag(false)),
            }
            r.push(dec);
        }
        Err(e) => {
            let mut rep = VerificationReport::new("representation", g.label(), *tol);
            rep.fail_with("error", Witness::Text(e.to_string()));
            r.push(rep);
        }
    }
    r
}

fn operator(cfg: &JobConfig, spec: &OperatorSpec) -> Result<LinOp, Error> {
    let g = &cfg.group.group;
    Ok(match spec {
        OperatorSpec::Matrix(rows) => LinOp::from_fn(rows.len(), rows.len(), |i, j| rows[i][j]),
        OperatorSpec::Named(NamedOperator::LeftRegular(h)) => lp::left_regular(g, *h),
        OperatorSpec::Named(NamedOperator::RightRegular(h)) => lp::right_regular(g, *h),
        OperatorSpec::Named(NamedOperator::Scalar([re, im])) => {
            LinOp::identity(g.order()).scale(Complex64::new(*re, *im))
        }
    })
}

fn orbit(cfg: &JobConfig, pair: &FramePair, tol: &schauder_core::Tolerances) -> Result<VerificationReport, Error> {
    let g = pair.group();
    let u = operator(cfg, cfg.u.as_ref().expect("validated: orbit-pair has u"))?;
    if u.nrows() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            found: u.nrows(),
        });
    }
    let mode = match cfg.mode {
        OrbitModeSpec::Commutant => OrbitMode::Commutant,
        OrbitModeSpec::DoubleCommutant => OrbitMode::DoubleCommutant,
    };
    let rep = pusf::build_representation(pair, tol)?;
    let moved = pusf::orbit_pair(pair, &rep, &u, mode, tol)?;
    let mut r = VerificationReport::new("orbit-pair", g.label(), *tol);
    let e = g.identity();
    r.witness("f-e", Witness::vector(moved.functional(e).coeffs().iter()));
    r.witness("tau-e", Witness::vector(moved.vector(e).coeffs().iter()));
    r.push(pusf::verify_p_usf(&moved, tol));
    r.push(pusf::check_shift_invariance(&moved, tol));
    Ok(r)
}

fn gabor_pair(cfg: &JobConfig, seed: Option<u64>) -> Result<GaborPair, Error> {
    let n = cfg.group.group.order();
    match &cfg.pair {
        PairSpec::Standard => GaborPair::new(GFunctional::coordinate(n, 0), GVector::basis(n, 0)),
        PairSpec::SeededRandom(_) => Ok(GaborPair::seeded(n, seed.unwrap_or(DEFAULT_SEED))),
        PairSpec::Explicit { f, tau } => {
            GaborPair::new(GFunctional::from_vec(f.clone())?, GVector::from_vec(tau.clone())?)
        }
    }
}

/// The configured lattice, or all of `G x G^` when none is given.
fn lattice(cfg: &JobConfig) -> Result<Lattice, Error> {
    let g = abelian(cfg);
    match &cfg.lattice {
        Some(gens) => gabor::lattice_from_generators(g, gens),
        None => Ok(Lattice::full(g)),
    }
}

fn with_lattice(
    cfg: &JobConfig,
    seed: Option<u64>,
    check: impl FnOnce(&GaborPair, &Lattice) -> Result<VerificationReport, Error>,
) -> Result<VerificationReport, Error> {
    let pair = gabor_pair(cfg, seed)?;
    let lam = lattice(cfg)?;
    let mut report = check(&pair, &lam)?;
    report.witness("lattice-order", Witness::Count(lam.order()));
    Ok(report)
}
