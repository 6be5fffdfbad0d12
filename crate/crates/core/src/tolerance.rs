use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute residual threshold, scaled by `max(1, max entry modulus)`.
    pub residual: f64,
    /// Relative threshold below which a matrix entry counts as structurally zero.
    pub zero: f64,
    /// Relative singular-value threshold for rank, nullspace and invertibility.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            zero: 1e-10,
            rank: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn with_residual(mut self, residual: f64) -> Self {
        self.residual = residual;
        self
    }

    /// Residual threshold for operators whose largest entry modulus is `scale`.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.residual * scale.max(1.0)
    }
}
