//! Cell-centred finite-volume discretisation of the linearised
//! Poisson-Boltzmann (Debye-Hückel) equation −Δψ + κ²ψ = 0 on the block grid,
//! solved by red-black SOR. Boundary conditions are folded into the stencils
//! and the right-hand side before each solve, so they can change between
//! solves as particles move.

mod bc;
mod sor;
mod stencil;

pub use bc::{adapt_rhs_bc, adapt_stencils_bc, clear_particle_bc, update_near_bc, BcClass, BcKind, BcRegistry, FaceBc};
pub use sor::{residual_l2, sor_iteration_red_black, PotentialSystem, SolveStats, SorConfig};
pub use stencil::{assemble_dh_stencil, FullStencils, QuasiConstantStencils, Stencil, StencilStore};

/// Per-cell state of the potential solver.
pub mod flags {
    /// Non-boundary cell with at least one boundary cell among its six face
    /// neighbours; uses an override stencil.
    pub const NEAR_BC: u8 = 1;
    pub const DIRICHLET: u8 = 2;
    pub const NEUMANN: u8 = 4;
    /// Boundary cell set by a moving particle (always Dirichlet).
    pub const PARTICLE: u8 = 8;

    pub const BC: u8 = DIRICHLET | NEUMANN;
}
