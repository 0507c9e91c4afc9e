//! Coupled lattice Boltzmann / Debye-Hückel solver for the electrophoresis of
//! charged rigid spheres on a block-structured Cartesian grid.
//!
//! All kernels work in lattice units (dx = dt = rho0 = 1, potential in volts);
//! [`units`] converts at the boundaries of a run.

pub mod analytic;
pub mod app;
pub mod electrokin;
pub mod error;
pub mod grid;
pub mod lbm;
pub mod momex;
pub mod potential;
pub mod rigid;
pub mod units;

pub use error::{Error, Result};
