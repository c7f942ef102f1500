//! Shared fixtures for the benchmark targets: near-threshold random
//! configurations where the closure does nontrivial work.

use anisoboot_core::{Dims, Lattice, NeighborhoodSpec, Result};

/// A p-random square at the given side, seeded deterministically.
pub fn square(side: usize, p: f64, seed: u64) -> Result<Lattice> {
    Lattice::random_fill(Dims::cube(2, side)?, p, seed)
}

/// A p-random cube at the given side, seeded deterministically.
pub fn cube(side: usize, p: f64, seed: u64) -> Result<Lattice> {
    Lattice::random_fill(Dims::cube(3, side)?, p, seed)
}

pub fn model(radii: &[u32]) -> NeighborhoodSpec {
    NeighborhoodSpec::new(radii).expect("fixed radii")
}
