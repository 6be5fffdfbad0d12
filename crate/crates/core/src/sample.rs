//! Seeded pseudo-random instances. ChaCha keeps streams identical across
//! platforms, so reports that quote a seed are reproducible.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex number with real and imaginary parts uniform in `[-1, 1)`.
pub fn complex(rng: &mut SeededRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn vector(rng: &mut SeededRng, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| complex(rng))
}

pub fn matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

/// Unit-modulus complex number with uniformly distributed phase.
pub fn phase(rng: &mut SeededRng) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = vector(&mut rng(7), 5);
        let b = vector(&mut rng(7), 5);
        assert_eq!(a, b);
        let c = vector(&mut rng(8), 5);
        assert_ne!(a, c);
    }
}
