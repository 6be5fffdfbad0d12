//! Job descriptions: a single JSON document naming a group, a command and
//! whatever inputs that command reads. Complex numbers are `[re, im]`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;

use schauder_core::gabor::TFPoint;
use schauder_core::lp::PNorm;
use schauder_core::{AbelianGroup, FiniteGroup, Tolerances};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GroupInfo,
    CharacterOrthogonality,
    CommutationTheorem,
    CheckPusf,
    CheckGroupframe,
    OrbitPair,
    TfCommutation,
    Moyal,
    Inversion,
    AdjointLattice,
    FrameCheck,
    GaborDual,
    Janssen,
    WexlerRaz,
    RonShen,
    HsOnb,
}

/// Name and one-line summary of every command, in listing order.
pub const COMMANDS: &[(Command, &str, &str)] = &[
    (
        Command::GroupInfo,
        "group-info",
        "order, identity, inverses and abelian structure",
    ),
    (
        Command::CharacterOrthogonality,
        "character-orthogonality",
        "both character orthogonality relations",
    ),
    (
        Command::CommutationTheorem,
        "commutation-theorem",
        "commutants of the regular representations and the J-conjugation",
    ),
    (
        Command::CheckPusf,
        "check-pusf",
        "reconstruction, analysis isometry and Gramian projection",
    ),
    (
        Command::CheckGroupframe,
        "check-groupframe",
        "shift invariance, group matrix and representation rebuild",
    ),
    (
        Command::OrbitPair,
        "orbit-pair",
        "new frame pair from a commutant isometry",
    ),
    (
        Command::TfCommutation,
        "tf-commutation",
        "addition, commutation and inverse rules for time-frequency shifts",
    ),
    (Command::Moyal, "moyal", "V_tau W_f = o(G) f(tau) I"),
    (
        Command::Inversion,
        "inversion",
        "reconstruction from all time-frequency shifts",
    ),
    (
        Command::AdjointLattice,
        "adjoint-lattice",
        "adjoint lattice and its involution",
    ),
    (
        Command::FrameCheck,
        "frame-check",
        "invertibility of the frame operator and its commutation",
    ),
    (
        Command::GaborDual,
        "gabor-dual",
        "canonical dual pair and both dual reconstructions",
    ),
    (
        Command::Janssen,
        "janssen",
        "frame operator expanded over the adjoint lattice",
    ),
    (
        Command::WexlerRaz,
        "wexler-raz",
        "biorthogonality on the adjoint lattice versus S = I",
    ),
    (
        Command::RonShen,
        "ron-shen",
        "independence of adjoint-lattice families for a frame",
    ),
    (
        Command::HsOnb,
        "hs-onb",
        "Hilbert-Schmidt orthogonality of all time-frequency shifts",
    ),
];

impl Command {
    pub fn name(self) -> &'static str {
        COMMANDS.iter().find(|(c, _, _)| *c == self).expect("listed").1
    }

    /// Commands that only make sense on `C^{o(G)}` with characters.
    pub fn needs_abelian(self) -> bool {
        matches!(
            self,
            Command::CharacterOrthogonality
                | Command::TfCommutation
                | Command::Moyal
                | Command::Inversion
                | Command::AdjointLattice
                | Command::FrameCheck
                | Command::GaborDual
                | Command::Janssen
                | Command::WexlerRaz
                | Command::RonShen
                | Command::HsOnb
        )
    }

    pub fn is_gabor(self) -> bool {
        self.needs_abelian() && self != Command::CharacterOrthogonality
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        COMMANDS
            .iter()
            .find(|(_, name, _)| *name == s)
            .map(|(c, _, _)| *c)
            .ok_or_else(|| CliError::UnknownCommand(s.to_string()))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    group: RawGroup,
    command: String,
    p: Option<f64>,
    lattice: Option<Vec<[usize; 2]>>,
    pair: Option<RawPair>,
    families: Option<RawFamilies>,
    ambient: Option<RawAmbient>,
    u: Option<RawOperator>,
    mode: Option<String>,
    x: Option<Vec<[f64; 2]>>,
    seed: Option<u64>,
    tolerance: Option<RawTolerance>,
    order_limit: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
enum RawGroup {
    Abelian(Vec<usize>),
    Table(Vec<Vec<usize>>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPair {
    Preset(String),
    Explicit { f: Vec<[f64; 2]>, tau: Vec<[f64; 2]> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamilies {
    f: Vec<Vec<[f64; 2]>>,
    tau: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAmbient {
    Named(String),
    Coordinate { coordinate: f64 },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawOperator {
    Matrix(Vec<Vec<[f64; 2]>>),
    Named(NamedOperator),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum NamedOperator {
    /// `lambda_h`.
    LeftRegular(usize),
    /// `rho_h`.
    RightRegular(usize),
    /// A unimodular multiple of the identity.
    Scalar([f64; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerance {
    residual: Option<f64>,
    zero: Option<f64>,
    rank: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GroupDesc {
    pub group: FiniteGroup,
    pub abelian: Option<AbelianGroup>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairSpec {
    Standard,
    /// `None` defers to the run's seed.
    SeededRandom(Option<u64>),
    Explicit {
        f: Vec<Complex64>,
        tau: Vec<Complex64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum AmbientSpec {
    Pullback,
    /// Coordinate `l^q`; `None` means `q = p`.
    Coordinate(Option<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    Matrix(Vec<Vec<Complex64>>),
    Named(NamedOperator),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitModeSpec {
    Commutant,
    DoubleCommutant,
}

/// Explicit frame families, one row of coefficients per group element.
#[derive(Clone, Debug, PartialEq)]
pub struct Families {
    pub f: Vec<Vec<Complex64>>,
    pub tau: Vec<Vec<Complex64>>,
}

/// A validated job.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub group: GroupDesc,
    pub command: Command,
    pub p: PNorm,
    pub lattice: Option<Vec<TFPoint>>,
    pub pair: PairSpec,
    pub families: Option<Families>,
    pub ambient: Option<AmbientSpec>,
    pub u: Option<OperatorSpec>,
    pub mode: OrbitModeSpec,
    pub x: Option<Vec<Complex64>>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub order_limit: usize,
}

fn complex(v: &[f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn complexes(field: &str, v: &[[f64; 2]]) -> Result<Vec<Complex64>, CliError> {
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::validation(field, "coefficients must be finite"));
    }
    Ok(v.iter().map(complex).collect())
}

fn expect_len(field: &str, got: usize, want: usize) -> Result<(), CliError> {
    if got != want {
        return Err(CliError::validation(
            field,
            format!("expected {want} entries, found {got}"),
        ));
    }
    Ok(())
}

/// Parse and validate a job description.
pub fn parse_config(text: &str) -> Result<JobConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => CliError::validation("config", &e),
        _ => CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
    })?;

    let command: Command = raw.command.parse()?;

    let group = match &raw.group {
        RawGroup::Abelian(orders) => {
            let ab = AbelianGroup::new(orders).map_err(|e| CliError::validation("group.abelian", e))?;
            GroupDesc {
                group: ab.group().clone(),
                abelian: Some(ab),
            }
        }
        RawGroup::Table(rows) => {
            let g = FiniteGroup::from_table(rows).map_err(|e| CliError::validation("group.table", e))?;
            GroupDesc {
                group: g.with_label(format!("table{}", rows.len())),
                abelian: None,
            }
        }
    };
    if command.needs_abelian() && group.abelian.is_none() {
        return Err(CliError::validation(
            "group",
            format!("command {command} needs an abelian group given by cyclic orders"),
        ));
    }
    let n = group.group.order();

    let p = PNorm::new(raw.p.unwrap_or(2.0)).map_err(|e| CliError::validation("p", e))?;

    let lattice = match &raw.lattice {
        None => None,
        Some(points) => {
            let mut out = Vec::with_capacity(points.len());
            for (i, [k, xi]) in points.iter().enumerate() {
                if *k >= n || *xi >= n {
                    return Err(CliError::validation(
                        format!("lattice[{i}]"),
                        format!("point ({k}, {xi}) out of range for order {n}"),
                    ));
                }
                out.push(TFPoint::new(*k, *xi));
            }
            Some(out)
        }
    };

    let pair = match &raw.pair {
        None => PairSpec::Standard,
        Some(RawPair::Preset(name)) => parse_preset(name)?,
        Some(RawPair::Explicit { f, tau }) => {
            expect_len("pair.f", f.len(), n)?;
            expect_len("pair.tau", tau.len(), n)?;
            PairSpec::Explicit {
                f: complexes("pair.f", f)?,
                tau: complexes("pair.tau", tau)?,
            }
        }
    };

    let families = match &raw.families {
        None => None,
        Some(fam) => {
            expect_len("families.f", fam.f.len(), n)?;
            expect_len("families.tau", fam.tau.len(), n)?;
            let m = fam.f.first().map_or(0, Vec::len);
            if m == 0 {
                return Err(CliError::validation(
                    "families.f",
                    "functionals need at least one coefficient",
                ));
            }
            let mut f = Vec::with_capacity(n);
            let mut tau = Vec::with_capacity(n);
            for (g, (fg, tg)) in fam.f.iter().zip(&fam.tau).enumerate() {
                expect_len(&format!("families.f[{g}]"), fg.len(), m)?;
                expect_len(&format!("families.tau[{g}]"), tg.len(), m)?;
                f.push(complexes("families.f", fg)?);
                tau.push(complexes("families.tau", tg)?);
            }
            Some(Families { f, tau })
        }
    };

    let ambient = match &raw.ambient {
        None => None,
        Some(RawAmbient::Named(s)) => Some(match s.as_str() {
            "pullback" => AmbientSpec::Pullback,
            "coordinate" => AmbientSpec::Coordinate(None),
            other => {
                return Err(CliError::validation(
                    "ambient",
                    format!("expected \"pullback\", \"coordinate\" or {{\"coordinate\": q}}, found {other:?}"),
                ))
            }
        }),
        Some(RawAmbient::Coordinate { coordinate }) => {
            PNorm::new(*coordinate).map_err(|e| CliError::validation("ambient.coordinate", e))?;
            Some(AmbientSpec::Coordinate(Some(*coordinate)))
        }
    };

    let u = match &raw.u {
        None => None,
        Some(RawOperator::Matrix(rows)) => {
            let m = rows.len();
            let mut out = Vec::with_capacity(m);
            for (i, row) in rows.iter().enumerate() {
                expect_len(&format!("u[{i}]"), row.len(), m)?;
                out.push(complexes("u", row)?);
            }
            Some(OperatorSpec::Matrix(out))
        }
        Some(RawOperator::Named(named)) => {
            match named {
                NamedOperator::LeftRegular(h) | NamedOperator::RightRegular(h) if *h >= n => {
                    return Err(CliError::validation(
                        "u",
                        format!("element {h} out of range for order {n}"),
                    ))
                }
                NamedOperator::Scalar(z) if !z.iter().all(|v| v.is_finite()) => {
                    return Err(CliError::validation("u.scalar", "must be finite"))
                }
                _ => {}
            }
            Some(OperatorSpec::Named(named.clone()))
        }
    };
    if command == Command::OrbitPair && u.is_none() {
        return Err(CliError::validation("u", "orbit-pair needs an operator"));
    }

    let mode = match raw.mode.as_deref() {
        None | Some("commutant") => OrbitModeSpec::Commutant,
        Some("double-commutant") => OrbitModeSpec::DoubleCommutant,
        Some(other) => {
            return Err(CliError::validation(
                "mode",
                format!("expected \"commutant\" or \"double-commutant\", found {other:?}"),
            ))
        }
    };

    let x = match &raw.x {
        None => None,
        Some(v) => {
            expect_len("x", v.len(), n)?;
            Some(complexes("x", v)?)
        }
    };

    let mut tolerances = Tolerances::default();
    if let Some(t) = &raw.tolerance {
        for (name, slot, value) in [
            ("tolerance.residual", &mut tolerances.residual, t.residual),
            ("tolerance.zero", &mut tolerances.zero, t.zero),
            ("tolerance.rank", &mut tolerances.rank, t.rank),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::validation(name, "must be positive and finite"));
                }
                *slot = v;
            }
        }
    }

    Ok(JobConfig {
        group,
        command,
        p,
        lattice,
        pair,
        families,
        ambient,
        u,
        mode,
        x,
        seed: raw.seed,
        tolerances,
        order_limit: raw.order_limit.unwrap_or(schauder_core::lp::DEFAULT_ORDER_LIMIT),
    })
}

fn parse_preset(name: &str) -> Result<PairSpec, CliError> {
    match name {
        "standard" => Ok(PairSpec::Standard),
        "seeded-random" => Ok(PairSpec::SeededRandom(None)),
        _ => match name.strip_prefix("seeded-random:") {
            Some(seed) => seed
                .parse::<u64>()
                .map(|s| PairSpec::SeededRandom(Some(s)))
                .map_err(|_| CliError::validation("pair", format!("seed {seed:?} is not an unsigned integer"))),
            None => Err(CliError::validation(
                "pair",
                format!("unknown preset {name:?}; expected \"standard\" or \"seeded-random:<seed>\""),
            )),
        },
    }
}
