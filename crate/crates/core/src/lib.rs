//! Group-generated unconditional Schauder frames on `l^p(G)` for finite
//! groups, and the Gabor-Schauder frame calculus on `C^{o(G)}` for finite
//! abelian groups.
//!
//! Every structural statement is exposed as a check returning a
//! [`VerificationReport`]; the matrices involved are dense and small.
//!
//! Module map:
//! - [`group`]: finite groups from multiplication tables, abelian groups,
//!   characters and subgroup closure.
//! - [`lp`]: vectors and functionals on `l^p(G)`, regular representations,
//!   the inversion involution, commutants and isometry classification.
//! - [`pusf`]: analysis/synthesis operators, Gramians, group matrices,
//!   rebuilding the frame representation and commutant orbits.
//! - [`gabor`]: time-frequency shifts, lattices, frame operators, duals,
//!   Janssen coefficients, Wexler-Raz and Ron-Shen checks.

pub mod error;
pub mod gabor;
pub mod group;
pub mod instances;
pub mod linalg;
pub mod lp;
pub mod pusf;
pub mod report;
pub mod sample;
pub mod tolerance;

pub use error::{Error, Result};
pub use group::{AbelianGroup, Character, FiniteGroup};
pub use linalg::LinOp;
pub use lp::{GFunctional, GVector, PNorm};
pub use report::{Provenance, Verdict, VerificationReport, Witness};
pub use tolerance::Tolerances;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
