//! Block-structured Cartesian grid: domain decomposition, cell fields with one
//! ghost layer, direction sets, block-parallel sweeps and reductions.

pub mod dirs;
mod domain;
mod field;
mod sweep;

pub use domain::{BlockDomain, BlockInfo, BlockLayout};
pub use field::{CellField, Pattern};
pub use sweep::{global_l2, global_l2_with, global_sum_with, run_sweep, run_sweep_masked, CellCtx, Executor};

/// Per-cell state for the flow solver.
pub mod flags {
    pub const FLUID: u8 = 1;
    pub const NO_SLIP: u8 = 2;
    pub const FREE_SLIP: u8 = 4;
    pub const OBSTACLE: u8 = 8;
    /// Set on fluid cells with at least one non-fluid D3Q19 neighbor.
    pub const NEAR: u8 = 16;

    pub const WALL: u8 = NO_SLIP | FREE_SLIP;
}
