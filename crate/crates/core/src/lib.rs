//! Simulation and analysis toolkit for anisotropic bootstrap percolation on
//! finite lattices.
//!
//! The `(a, b, c)` model (and its 2D `(a, b)` restriction) evolves occupancy
//! on a finite box: an empty site with at least `k = a + b (+ c)` occupied
//! neighbors becomes occupied, where the neighborhood is the `a` nearest
//! sites in each x direction, `b` in y, `c` in z. Occupied sites never empty.
//! The crate provides:
//!
//! - [`lattice`]: bit-packed finite lattices, neighborhood specs, seeded
//!   fills, snapshot I/O;
//! - [`dynamics`]: the closure (fixpoint) of the update rule, a naive oracle,
//!   spanning/crossing predicates, weak enhancement, dimensional reduction;
//! - [`enhancement`]: the slice/minicolumn enhancement and the
//!   stepping-stone statistic;
//! - [`bounds`]: closed-form upper bounds and threshold brackets, evaluated
//!   in log space;
//! - [`droplets`]: critical droplet sizing and seeded growth experiments;
//! - [`regions`]: the region-merging trace and weakly crossed block search;
//! - [`estimator`]: deterministic Monte Carlo estimation, threshold
//!   bisection, sweeps, and scaling fits.
//!
//! Everything randomized is a pure function of the caller's seed (see
//! [`rng`]); results are independent of thread count.

pub mod bounds;
pub mod dynamics;
pub mod enhancement;
pub mod error;
pub mod estimator;
pub mod droplets;
pub mod lattice;
pub mod regions;
pub mod rng;

pub use error::{Error, Result};
pub use lattice::{Block, Coord, Dims, Lattice, NeighborhoodSpec};
