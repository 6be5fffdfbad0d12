//! Fixed inputs shared by the benchmarks.

use schauder_core::gabor::{all_lattices, GaborPair, Lattice};
use schauder_core::AbelianGroup;

pub const SEED: u64 = 17;

pub fn cyclic(n: usize) -> AbelianGroup {
    AbelianGroup::cyclic(n).expect("positive order")
}

/// Seeded pair on `Z_n`.
pub fn pair(n: usize) -> GaborPair {
    GaborPair::seeded(n, SEED)
}

/// Largest proper lattice of `Z_n x Z_n^`, or the full one for `n = 1`.
pub fn large_lattice(g: &AbelianGroup) -> Lattice {
    let full = g.order() * g.order();
    all_lattices(g)
        .into_iter()
        .filter(|l| l.order() < full)
        .max_by_key(Lattice::order)
        .unwrap_or_else(|| Lattice::full(g))
}
