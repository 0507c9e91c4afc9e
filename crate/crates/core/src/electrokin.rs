//! Coupling between the potential solver, the flow solver and the bodies.

use serde::Serialize;

use crate::analytic::{debye_kappa, number_density, VACUUM_PERMITTIVITY};

/// Symmetric electrolyte in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElectrolyteParams {
    pub eps_r: f64,
    /// ε_e = ε_r ε0 in A·s/(V·m).
    pub eps_e: f64,
    pub valence: f64,
    pub temperature: f64,
    /// Bulk concentration in mol/L.
    pub c_inf: f64,
    /// Bulk ion number density in 1/m³.
    pub n_inf: f64,
    pub kappa: f64,
    pub debye_length: f64,
}

impl ElectrolyteParams {
    pub fn new(eps_r: f64, valence: f64, temperature: f64, c_inf: f64) -> Self {
        let eps_e = eps_r * VACUUM_PERMITTIVITY;
        let kappa = debye_kappa(c_inf, valence, temperature, eps_e);
        Self {
            eps_r,
            eps_e,
            valence,
            temperature,
            c_inf,
            n_inf: number_density(c_inf),
            kappa,
            debye_length: 1.0 / kappa,
        }
    }
}

use crate::grid::dirs::{D3Q19_C, D3Q19_W, D3Q7_C, Q19, Q7};
use crate::grid::{flags as fluid_flags, BlockDomain, CellField, Executor};
use crate::momex::covered_cells;
use crate::potential::{flags, update_near_bc, PotentialSystem, StencilStore};
use crate::rigid::RigidBody;

/// Change of the particle boundary cells caused by a mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BcDelta {
    pub changed: bool,
    pub cells: usize,
}

/// Maps charged bodies onto the potential grid as Dirichlet cells with their
/// ζ-potential. Three passes, each over all bodies: remove the previous
/// particle boundary cells, register and flag the cells covered by bodies
/// with a surface potential, then refresh the near-boundary flags around old
/// and new boundary cells. Where bodies overlap the lower index wins.
pub fn set_pot_bc_charged_particles<S: StencilStore>(
    domain: &BlockDomain,
    sys: &mut PotentialSystem<S>,
    bodies: &[RigidBody],
) -> BcDelta {
    let old = sys.registry.particles.cells.clone();
    crate::potential::clear_particle_bc(&mut sys.flags, &mut sys.registry);

    for b in 0..domain.num_blocks() {
        for body in bodies {
            let Some(zeta) = body.zeta else { continue };
            for c in covered_cells(domain, b, body.kin.position, body.radius, sys.periodic, true) {
                let f = sys.flags.get(b, c, 0);
                if f & flags::BC != 0 {
                    continue;
                }
                sys.flags.set(b, c, 0, flags::DIRICHLET | flags::PARTICLE);
                sys.registry.particles.cells[b].push((c, zeta));
            }
        }
        sys.registry.particles.cells[b].sort_by_key(|e| e.0);
    }

    let layout = *domain.layout();
    let offs: [isize; Q7] = std::array::from_fn(|q| layout.offset(D3Q7_C[q]));
    let mut changed = false;
    for b in 0..domain.num_blocks() {
        let new = &sys.registry.particles.cells[b];
        changed |= old[b] != *new;
        let mut dirty: Vec<usize> = old[b]
            .iter()
            .chain(new.iter())
            .flat_map(|&(c, _)| {
                offs.iter().filter_map(move |&o| {
                    let n = c as isize + o;
                    (n >= 0 && (n as usize) < layout.len).then_some(n as usize)
                })
            })
            .collect();
        dirty.sort_unstable();
        dirty.dedup();
        update_near_bc(domain, &mut sys.flags, b, dirty.into_iter());
    }
    BcDelta {
        changed,
        cells: sys.registry.particles.len(),
    }
}

/// E_EDL = −∇ψ at all non-boundary cells (zero at boundary cells). Uses the
/// isotropic D3Q19 difference where none of the 18 neighbours is a boundary
/// cell, otherwise D3Q7 central differences with the boundary values
/// extrapolated to the neighbour (2g − ψ for Dirichlet, ψ + g for Neumann).
/// The edge ghosts of `psi` must be current.
pub fn edl_field<S: StencilStore>(
    exec: &Executor,
    domain: &BlockDomain,
    sys: &PotentialSystem<S>,
    e_edl: &mut CellField<f64>,
) {
    let layout = *domain.layout();
    let len = layout.len;
    let o19: [isize; Q19] = std::array::from_fn(|q| layout.offset(D3Q19_C[q]));
    let psi = &sys.psi;
    let fl = &sys.flags;
    exec.for_each_block(e_edl.blocks_mut(), |b, out| {
        let p = psi.block(b);
        let f = fl.block(b);
        for c in layout.owned() {
            let mut grad = [0.0; 3];
            if f[c] & flags::BC == 0 {
                let at = |q: usize| (c as isize + o19[q]) as usize;
                let isotropic = f[c] & flags::NEAR_BC == 0 && (1..Q19).all(|q| f[at(q)] & flags::BC == 0);
                if isotropic {
                    for q in 1..Q19 {
                        let v = D3Q19_W[q] * p[at(q)];
                        let cq = D3Q19_C[q];
                        for a in 0..3 {
                            grad[a] += v * cq[a] as f64;
                        }
                    }
                    grad = grad.map(|g| g / D3Q19_W[0]);
                } else {
                    let value = |q: usize| {
                        let n = at(q);
                        if f[n] & flags::DIRICHLET != 0 {
                            2.0 * p[n] - p[c]
                        } else if f[n] & flags::NEUMANN != 0 {
                            p[c] + p[n]
                        } else {
                            p[n]
                        }
                    };
                    for a in 0..3 {
                        grad[a] = 0.5 * (value(1 + 2 * a) - value(2 + 2 * a));
                    }
                }
            }
            for a in 0..3 {
                out[a * len + c] = -grad[a];
            }
        }
    });
}

/// Charge density ρ_e = −κ²ε_e ψ (lattice units) at non-boundary fluid
/// cells; zero elsewhere.
pub fn charge_density<S: StencilStore>(
    exec: &Executor,
    domain: &BlockDomain,
    sys: &PotentialSystem<S>,
    fluid: &CellField<u8>,
    kappa_l: f64,
    eps_l: f64,
    rho_e: &mut CellField<f64>,
) {
    let layout = *domain.layout();
    let k = -kappa_l * kappa_l * eps_l;
    exec.for_each_block(rho_e.blocks_mut(), |b, out| {
        let p = sys.psi.block(b);
        let f = sys.flags.block(b);
        let ff = fluid.block(b);
        for c in layout.owned() {
            out[c] = if f[c] & flags::BC == 0 && ff[c] & fluid_flags::FLUID != 0 {
                k * p[c]
            } else {
                0.0
            };
        }
    });
}

/// Overwrites the body-force field with f_b = ρ_e (E_ext + E_EDL). Cells
/// with ρ_e = 0 (boundary and obstacle cells included) get exactly zero.
pub fn electric_body_force(
    exec: &Executor,
    domain: &BlockDomain,
    rho_e: &CellField<f64>,
    e_edl: &CellField<f64>,
    e_ext: [f64; 3],
    force: &mut CellField<f64>,
) {
    let layout = *domain.layout();
    let len = layout.len;
    exec.for_each_block(force.blocks_mut(), |b, out| {
        let r = rho_e.block(b);
        let e = e_edl.block(b);
        for c in 0..len {
            let q = r[c];
            for a in 0..3 {
                out[a * len + c] = if q == 0.0 { 0.0 } else { q * (e_ext[a] + e[a * len + c]) };
            }
        }
    });
}

/// Adds the Coulomb force q_s E_ext to every non-fixed body.
pub fn apply_coulomb_forces(bodies: &mut [RigidBody], e_ext: [f64; 3]) {
    for b in bodies.iter_mut().filter(|b| !b.fixed && b.charge != 0.0) {
        b.accumulate(e_ext.map(|e| b.charge * e), [0.0; 3]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverCall {
    Solve,
    Reuse,
}

/// Decides whether the potential has to be recomputed: on the first step,
/// whenever the particle boundary cells changed, and at least every
/// `force_interval` steps (0 disables the periodic re-solve).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverCallPolicy {
    pub force_interval: u64,
    last_solve: Option<u64>,
}

impl SolverCallPolicy {
    pub fn new(force_interval: u64) -> Self {
        Self {
            force_interval,
            last_solve: None,
        }
    }

    pub fn decide(&mut self, delta: BcDelta, step: u64) -> SolverCall {
        let due = match self.last_solve {
            None => true,
            Some(last) => delta.changed || (self.force_interval > 0 && step - last >= self.force_interval),
        };
        if due {
            self.last_solve = Some(step);
            SolverCall::Solve
        } else {
            SolverCall::Reuse
        }
    }
}
