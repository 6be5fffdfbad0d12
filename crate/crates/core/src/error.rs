use thiserror::Error;

use crate::report::VerificationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table is not square: row {row} has length {len}, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("table entry ({row}, {col}) = {value} is out of range for order {order}")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },

    #[error("not a group: {axiom} fails at witness ({a}, {b}, {c})")]
    NotAGroup {
        axiom: &'static str,
        a: usize,
        b: usize,
        c: usize,
    },

    #[error("abelian group needs at least one cyclic factor")]
    EmptyOrders,

    #[error("cyclic factor {index} has order zero")]
    ZeroOrder { index: usize },

    #[error("element index {index} out of range for group of order {order}")]
    InvalidElement { index: usize, order: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator list is empty")]
    EmptyOperatorList,

    #[error("p must lie in [1, inf), got {0}")]
    InvalidExponent(f64),

    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),

    #[error("operator is not invertible (singular value ratio {ratio:e})")]
    NotInvertible { ratio: f64 },

    #[error("operator is not an isometry (deviation {deviation:e})")]
    NotIsometry { deviation: f64 },

    #[error("operator is not in the requested commutant (residual {residual:e})")]
    NotInCommutant { residual: f64 },

    #[error("precondition failed: {}", .0.check)]
    PreconditionFailed(Box<VerificationReport>),

    #[error("postcondition failed: {}", .0.check)]
    PostconditionFailed(Box<VerificationReport>),

    #[error("pairing f(tau) = {modulus:e} is too small to invert")]
    VanishingPairing { modulus: f64 },

    #[error("generator {0} of a Gabor pair is zero")]
    ZeroGenerator(&'static str),

    #[error("time-frequency points {a} and {b} sum outside the lattice")]
    NotClosed { a: usize, b: usize },

    #[error("frame operator is not invertible")]
    NotAFrame,
}
