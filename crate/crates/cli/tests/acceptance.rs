//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use schauder_core::gabor::{
    adjoint_lattice, adjoint_lattice_by_matrices, all_lattices, canonical_dual, check_hs_onb, frame_operator, is_frame,
    janssen_decompose, lattice_from_generators, moyal_check, tf_shift, two_generator_lattices, wexler_raz, GaborPair,
    Lattice, TFPoint,
};
use schauder_core::instances::{
    character_representation, diagonal_character_representation, perturbed_pusf, random_group_pusf, PermutationGroup,
};
use schauder_core::linalg::LinOp;
use schauder_core::lp::{self, classify_lp_isometry, commutant, left_regular, phi_conjugate, right_regular, PNorm};
use schauder_core::pusf::{
    build_representation, check_shift_invariance, gramian, is_group_matrix, orbit_pair, verify_p_usf,
    verify_representation, FramePair, OrbitMode, RepresentationFamily,
};
use schauder_core::{sample, AbelianGroup, FiniteGroup, GFunctional, Tolerances, C64};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($msg)+));
        }
    };
}

fn ab(orders: &[usize]) -> AbelianGroup {
    AbelianGroup::new(orders).unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Character of `Z_{n1} x ... x Z_{nk}` labelled by `c`, evaluated at `x`,
/// computed from the digits with floating point phases.
fn character(g: &AbelianGroup, c: usize, x: usize) -> C64 {
    let (cd, xd) = (g.decode(c), g.decode(x));
    let turns: f64 = g
        .orders()
        .iter()
        .zip(cd.iter().zip(&xd))
        .map(|(&n, (&a, &b))| (a * b % n) as f64 / n as f64)
        .sum();
    C64::from_polar(1.0, std::f64::consts::TAU * turns)
}

/// Dense `pi(k, xi)`: column `j` holds `xi(j + k)` in row `j + k`.
fn shift_oracle(g: &AbelianGroup, k: usize, xi: usize) -> DMatrix<C64> {
    let n = g.order();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let t = g.add(j, k);
        m[(t, j)] = character(g, xi, t);
    }
    m
}

fn shift_inverse_oracle(g: &AbelianGroup, k: usize, xi: usize) -> DMatrix<C64> {
    shift_oracle(g, k, xi).adjoint()
}

/// `sum_{lambda in points} (pi(lambda) tau) (f o pi(lambda)^{-1})`.
fn frame_operator_oracle(g: &AbelianGroup, pair: &GaborPair, points: &[TFPoint]) -> DMatrix<C64> {
    let n = g.order();
    let (f, tau) = (pair.f().coeffs(), pair.tau().coeffs());
    let mut s = DMatrix::zeros(n, n);
    for p in points {
        let v = shift_oracle(g, p.k, p.xi) * tau;
        let w = shift_inverse_oracle(g, p.k, p.xi).transpose() * f;
        s += &v * w.transpose();
    }
    s
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn pairing(f: &DVector<C64>, x: &DVector<C64>) -> C64 {
    f.iter().zip(x.iter()).map(|(a, b)| a * b).sum()
}

fn oracle_agrees_with_shifts(g: &AbelianGroup) -> Outcome {
    for k in 0..g.order() {
        for xi in 0..g.order() {
            let d = max_abs(&(shift_oracle(g, k, xi) - tf_shift(g, TFPoint::new(k, xi)).matrix()));
            ensure!(
                d <= 1e-14,
                "{}: shift ({k},{xi}) differs from oracle by {d:e}",
                g.label()
            );
        }
    }
    Ok(String::new())
}

fn moyal_suite() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for o in [&[2][..], &[3], &[4], &[6], &[2, 2], &[2, 4]] {
        let g = ab(o);
        oracle_agrees_with_shifts(&g)?;
        let everything: Vec<TFPoint> = Lattice::full(&g).points().to_vec();
        for seed in 0..20 {
            let pair = GaborPair::seeded(g.order(), 1000 + seed);
            let report = moyal_check(&g, &pair, &tol()).map_err(|e| e.to_string())?;
            let target = DMatrix::identity(g.order(), g.order()) * pair.pairing() * C64::from(g.order() as f64);
            let oracle = max_abs(&(frame_operator_oracle(&g, &pair, &everything) - target));
            let r = report.residuals["moyal"];
            ensure!(
                r <= 1e-10 && oracle <= 1e-10,
                "{} seed {seed}: residual {r:e}, oracle {oracle:e}",
                g.label()
            );
            worst = worst.max(r).max(oracle);
            count += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs <= 10.0, "took {secs:.2} s");
    Ok(format!("{count} pairs, max residual {worst:.1e}, {secs:.2} s"))
}

/// `f` with one coefficient adjusted so that `f(tau) = 0`.
fn zero_pairing(pair: &GaborPair) -> GaborPair {
    let tau = pair.tau().coeffs();
    let mut f = pair.f().coeffs().clone();
    let i = tau.icamax();
    let fix = pairing(&f, tau) / tau[i];
    f[i] -= fix;
    GaborPair::new(GFunctional::new(f).unwrap(), pair.tau().clone()).unwrap()
}

fn wexler_raz_suite() -> Outcome {
    let t = tol();
    let mut rng = sample::rng(0x5eed);
    let mut counts = [0usize; 3];
    for o in [
        &[2][..],
        &[3],
        &[4],
        &[5],
        &[6],
        &[7],
        &[8],
        &[2, 2],
        &[2, 4],
        &[2, 2, 2],
    ] {
        let g = ab(o);
        let n = g.order();
        for round in 0..6u64 {
            let lam = if round == 0 {
                Lattice::full(&g)
            } else {
                let gens: Vec<TFPoint> = (0..1 + round % 2)
                    .map(|_| {
                        use rand::Rng;
                        TFPoint::from_index(rng.gen_range(0..n * n), &g)
                    })
                    .collect();
                lattice_from_generators(&g, &gens).map_err(|e| e.to_string())?
            };
            let pair = GaborPair::random(n, &mut rng);
            let mut cases = vec![(0, pair.clone(), None), (2, zero_pairing(&pair), Some(false))];
            let s = frame_operator(&pair, &lam).map_err(|e| e.to_string())?;
            if is_frame(&s, &t) {
                let dual = canonical_dual(&pair, &lam, &t).map_err(|e| e.to_string())?;
                cases.push((
                    1,
                    GaborPair::new(pair.f().clone(), dual.tau().clone()).unwrap(),
                    Some(true),
                ));
            }
            for (class, p, expected) in cases {
                let w = wexler_raz(&p, &lam, &t).map_err(|e| e.to_string())?;
                let oracle = max_abs(&(frame_operator_oracle(&g, &p, lam.points()) - DMatrix::identity(n, n))) <= 1e-9;
                ensure!(
                    w.agree() && w.identity == oracle,
                    "{} lattice order {} class {class}: biorthogonal {} identity {} oracle {oracle}",
                    g.label(),
                    lam.order(),
                    w.biorthogonal,
                    w.identity
                );
                if let Some(e) = expected {
                    ensure!(w.identity == e, "{} class {class}: expected S = I to be {e}", g.label());
                }
                counts[class] += 1;
            }
        }
    }
    let total: usize = counts.iter().sum();
    ensure!(total >= 100, "only {total} instances");
    ensure!(counts.iter().all(|&c| c > 0), "missing an instance class: {counts:?}");
    Ok(format!(
        "{total} instances ({} random, {} normalized, {} zero-pairing), 100% agreement",
        counts[0], counts[1], counts[2]
    ))
}

fn desk_groups() -> Vec<AbelianGroup> {
    [&[1][..], &[2], &[3], &[4], &[5], &[6], &[2, 2], &[2, 3]]
        .iter()
        .map(|o| ab(o))
        .collect()
}

fn janssen_suite() -> Outcome {
    let mut lattices_seen = 0;
    let mut worst = (0.0f64, 0.0f64);
    for g in desk_groups() {
        let n = g.order();
        let lattices = all_lattices(&g);
        for l in two_generator_lattices(&g) {
            ensure!(
                lattices.contains(&l),
                "{}: two-generator lattice missing from enumeration",
                g.label()
            );
        }
        for (li, lam) in lattices.iter().enumerate() {
            let adj = adjoint_lattice(lam);
            let weight = lam.order() as f64 / n as f64;
            for seed in 0..10 {
                let pair = GaborPair::seeded(n, (li * 10 + seed) as u64);
                let d = janssen_decompose(&pair, lam).map_err(|e| e.to_string())?;
                // independent expansion over the adjoint lattice
                let s = frame_operator_oracle(&g, &pair, lam.points());
                let mut expansion = DMatrix::zeros(n, n);
                for (mu, (p, c)) in adj.points().iter().zip(&d.coeffs) {
                    ensure!(mu == p, "coefficient order differs from adjoint lattice");
                    let inv = shift_inverse_oracle(&g, mu.k, mu.xi);
                    let coeff = pairing(pair.f().coeffs(), &(inv * pair.tau().coeffs())) * weight;
                    ensure!((coeff - c).norm() <= 1e-12, "coefficient mismatch at {mu:?}");
                    expansion += shift_oracle(&g, mu.k, mu.xi) * coeff;
                }
                let oracle = max_abs(&(s - expansion));
                ensure!(
                    d.residual <= 1e-10 && oracle <= 1e-10 && d.formula_gap <= 1e-10,
                    "{} lattice {li}: residual {:e} oracle {oracle:e} gap {:e}",
                    g.label(),
                    d.residual,
                    d.formula_gap
                );
                worst = (worst.0.max(d.residual).max(oracle), worst.1.max(d.formula_gap));
            }
            lattices_seen += 1;
        }
    }
    Ok(format!(
        "{lattices_seen} lattices x 10 pairs, max residual {:.1e}, max formula gap {:.1e}",
        worst.0, worst.1
    ))
}

fn adjoint_suite() -> Outcome {
    let mut count = 0;
    for g in desk_groups() {
        let n = g.order();
        let shifts: Vec<DMatrix<C64>> = (0..n * n)
            .map(|i| {
                let p = TFPoint::from_index(i, &g);
                shift_oracle(&g, p.k, p.xi)
            })
            .collect();
        for lam in all_lattices(&g) {
            let adj = adjoint_lattice(&lam);
            ensure!(
                adjoint_lattice(&adj) == lam,
                "{}: adjoint is not an involution",
                g.label()
            );
            ensure!(
                adjoint_lattice_by_matrices(&lam, &tol()) == adj,
                "{}: matrix adjoint differs",
                g.label()
            );
            // oracle: commutation of dense shifts
            let expected: Vec<usize> = (0..n * n)
                .filter(|&m| {
                    lam.indices()
                        .iter()
                        .all(|&l| max_abs(&(&shifts[m] * &shifts[l] - &shifts[l] * &shifts[m])) <= 1e-12)
                })
                .collect();
            ensure!(
                adj.indices() == expected,
                "{}: adjoint differs from commutation oracle",
                g.label()
            );
            count += 1;
        }
    }
    Ok(format!(
        "{count} lattices, involution exact, scalar and matrix adjoints agree"
    ))
}

fn s3_from_table() -> (FiniteGroup, Vec<RepresentationFamily>) {
    let s3 = PermutationGroup::symmetric(3);
    let table = FiniteGroup::from_table(&s3.group().table_rows())
        .unwrap()
        .with_label("S3");
    (table, vec![s3.permutation_representation(), s3.sign_representation()])
}

fn round_trip_suite() -> Outcome {
    let t = tol();
    let mut rng = sample::rng(0x6a7);
    let mut groups = Vec::new();
    for o in [2, 3, 4] {
        let g = ab(&[o]);
        let reps = vec![
            character_representation(&g, 1 % o),
            character_representation(&g, o - 1),
            diagonal_character_representation(&g, &[0, 1]),
        ];
        groups.push((g.group().clone(), reps));
    }
    groups.push(s3_from_table());
    let (mut accepted, mut rejected, mut worst) = (0, 0, 0.0f64);
    for _ in 0..12 {
        for (g, reps) in &groups {
            let (pair, _, kind) = random_group_pusf(g, reps, &mut rng).map_err(|e| e.to_string())?;
            ensure!(verify_p_usf(&pair, &t).passed(), "{} {kind:?}: not a p-USF", g.label());
            ensure!(
                is_group_matrix(g, &gramian(&pair).0, &t).is_some(),
                "{} {kind:?}: Gramian rejected",
                g.label()
            );
            let rep = build_representation(&pair, &t).map_err(|e| format!("{}: {e}", g.label()))?;
            ensure!(
                verify_representation(&pair, &rep, &t).passed(),
                "{}: representation check failed",
                g.label()
            );
            for a in 0..g.order() {
                for b in 0..g.order() {
                    let d = (rep.op(a) * rep.op(b)).max_abs_diff(rep.op(g.op(a, b)));
                    ensure!(d <= 1e-9, "{}: homomorphism defect {d:e}", g.label());
                    worst = worst.max(d);
                }
            }
            let e = g.identity();
            let again = FramePair::generated(
                g.clone(),
                &rep,
                pair.functional(e),
                pair.vector(e),
                pair.p(),
                pair.ambient(),
            )
            .map_err(|e| e.to_string())?;
            for h in 0..g.order() {
                let df = (again.functional(h).coeffs() - pair.functional(h).coeffs()).camax();
                let dv = (again.vector(h).coeffs() - pair.vector(h).coeffs()).camax();
                ensure!(
                    df <= 1e-9 && dv <= 1e-9,
                    "{}: regenerated family differs by {:e}",
                    g.label(),
                    df.max(dv)
                );
                worst = worst.max(df).max(dv);
            }
            accepted += 1;

            if pair.dim() < g.order() {
                let bent = perturbed_pusf(&pair, 0.1, &mut rng).map_err(|e| e.to_string())?;
                ensure!(
                    verify_p_usf(&bent, &t).passed(),
                    "{}: perturbed pair is not a p-USF",
                    g.label()
                );
                ensure!(
                    is_group_matrix(g, &gramian(&bent).0, &t).is_none(),
                    "{}: perturbed Gramian accepted",
                    g.label()
                );
                ensure!(
                    !check_shift_invariance(&bent, &t).passed(),
                    "{}: perturbed pair shift invariant",
                    g.label()
                );
                rejected += 1;
            }
        }
    }
    ensure!(
        accepted >= 25 && rejected >= 25,
        "{accepted} group pairs, {rejected} perturbed"
    );
    Ok(format!(
        "{accepted} group pairs rebuilt (max defect {worst:.1e}), {rejected} perturbed pairs rejected"
    ))
}

fn commutation_suite() -> Outcome {
    let mut groups: Vec<FiniteGroup> = [&[2][..], &[4], &[2, 2]]
        .iter()
        .map(|o| ab(o).group().clone())
        .collect();
    groups.push(s3_from_table().0);
    let mut labels = Vec::new();
    for g in &groups {
        let r = lp::check_commutation_theorem(g, &tol(), lp::DEFAULT_ORDER_LIMIT);
        ensure!(r.passed(), "{}: {:?}", g.label(), r);
        ensure!(
            r.subcheck("phi-conjugation").is_some_and(|s| s.passed()),
            "{}: phi check failed",
            g.label()
        );
        let dim = schauder_core::Witness::Count(g.order());
        ensure!(
            r.witnesses["dim-lambda-commutant"] == dim,
            "{}: commutant dimension",
            g.label()
        );
        for h in 0..g.order() {
            let d = phi_conjugate(g, &right_regular(g, h)).max_abs_diff(&left_regular(g, h));
            ensure!(d == 0.0, "{}: phi(rho_{h}) differs from lambda_{h} by {d:e}", g.label());
        }
        labels.push(g.label().to_string());
    }
    Ok(format!("{} hold, phi exact", labels.join(", ")))
}

fn orbit_suite() -> Outcome {
    let t = tol();
    let g = ab(&[4]);
    let group = g.group().clone();
    let n = group.order();
    let rep = RepresentationFamily::left_regular(&group);
    let mut runs = 0;
    for p in [1.0, 1.5, 2.0, 3.0] {
        let p = PNorm::new(p).unwrap();
        let pair = FramePair::standard(group.clone(), p);
        let mut us: Vec<(String, LinOp, OrbitMode)> = Vec::new();
        for (i, theta) in [0.0, 0.7, 2.0, std::f64::consts::PI].into_iter().enumerate() {
            let z = C64::from_polar(1.0, theta);
            us.push((format!("scalar {i}"), LinOp::identity(n).scale(z), OrbitMode::Commutant));
            us.push((
                format!("scalar {i}"),
                LinOp::identity(n).scale(z),
                OrbitMode::DoubleCommutant,
            ));
        }
        for h in 0..n {
            us.push((format!("lambda_{h}"), left_regular(&group, h), OrbitMode::Commutant));
            us.push((
                format!("lambda_{h}"),
                left_regular(&group, h),
                OrbitMode::DoubleCommutant,
            ));
            us.push((format!("rho_{h}"), right_regular(&group, h), OrbitMode::Commutant));
        }
        let basis = commutant(rep.ops(), t.rank).map_err(|e| e.to_string())?;
        for (i, b) in basis.iter().enumerate() {
            // rescale so a unimodular entry comes first
            let z = b
                .matrix()
                .iter()
                .find(|z| z.norm() > 1e-9)
                .copied()
                .unwrap_or(C64::from(1.0));
            let u = b.scale(C64::from(1.0) / z);
            let v = classify_lp_isometry(&u, p, &t).map_err(|e| e.to_string())?;
            if v.is_isometry() {
                us.push((format!("basis {i}"), u, OrbitMode::Commutant));
            }
        }
        for (name, u, mode) in us {
            let moved = orbit_pair(&pair, &rep, &u, mode, &t).map_err(|e| format!("p={} {name}: {e}", p.value()))?;
            ensure!(verify_p_usf(&moved, &t).passed(), "p={} {name}: not a p-USF", p.value());
            ensure!(
                check_shift_invariance(&moved, &t).passed(),
                "p={} {name}: not shift invariant",
                p.value()
            );
            runs += 1;
        }
    }
    Ok(format!("{runs} orbit pairs on Z4 for p in {{1, 1.5, 2, 3}}"))
}

fn hs_suite() -> Outcome {
    let t = Tolerances {
        residual: 1e-12,
        ..tol()
    };
    let mut worst = 0.0f64;
    let mut groups = 0;
    for o in [
        &[1][..],
        &[2],
        &[3],
        &[4],
        &[5],
        &[6],
        &[7],
        &[8],
        &[2, 2],
        &[2, 3],
        &[2, 4],
        &[2, 2, 2],
    ] {
        let g = ab(o);
        let r = check_hs_onb(&g, &t, 8);
        ensure!(r.passed(), "{}: {:?}", g.label(), r.residuals);
        // oracle: sum of entrywise products of dense shifts
        let n = g.order();
        let shifts: Vec<DMatrix<C64>> = (0..n * n)
            .map(|i| {
                let p = TFPoint::from_index(i, &g);
                shift_oracle(&g, p.k, p.xi)
            })
            .collect();
        for (a, sa) in shifts.iter().enumerate() {
            for (b, sb) in shifts.iter().enumerate() {
                let ip: C64 = sa.iter().zip(sb.iter()).map(|(x, y)| x * y.conj()).sum();
                let target = if a == b { n as f64 } else { 0.0 };
                let d = (ip - target).norm();
                ensure!(d <= 1e-12, "{}: oracle gram entry ({a},{b}) off by {d:e}", g.label());
            }
        }
        worst = worst.max(r.residuals["gram"]);
        groups += 1;
    }
    Ok(format!("{groups} groups, max deviation {worst:.1e}"))
}

fn golden_suite() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let mut lines = Vec::new();
    for name in ["z2_moyal", "z4_janssen"] {
        let config = root.join("configs").join(format!("{name}.json"));
        let golden =
            std::fs::read(root.join("tests/golden").join(format!("{name}.json"))).map_err(|e| e.to_string())?;
        let mut runs = Vec::new();
        for _ in 0..2 {
            let out = Command::new(env!("CARGO_BIN_EXE_schauder"))
                .args(["--output", "machine"])
                .arg(&config)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(
                out.status.code() == Some(0),
                "{name}: exit status {:?}",
                out.status.code()
            );
            runs.push(out.stdout);
        }
        ensure!(runs[0] == runs[1], "{name}: two runs differ");
        ensure!(runs[0] == golden, "{name}: output differs from golden report");
        lines.push(name);
    }
    Ok(format!("{} byte-identical", lines.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("moyal identity", moyal_suite),
        ("wexler-raz equivalence", wexler_raz_suite),
        ("janssen expansion", janssen_suite),
        ("adjoint involution", adjoint_suite),
        ("group-matrix round trip", round_trip_suite),
        ("commutation theorem", commutation_suite),
        ("orbit inclusions", orbit_suite),
        ("hilbert-schmidt basis", hs_suite),
        ("cli determinism", golden_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
