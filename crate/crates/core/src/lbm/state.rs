use crate::grid::dirs::{D3Q19_C, D3Q19_W, Q19};
use crate::grid::{flags, global_sum_with, BlockDomain, CellField, Executor, Pattern};

use super::{equilibrium, macroscopic, moments, FlowBc};

/// PDFs (source and destination buffers) plus macroscopic and force fields.
pub struct FluidState {
    pub src: CellField<f64>,
    pub dst: CellField<f64>,
    /// Body-force density f_b (lattice units, 3 components).
    pub force: CellField<f64>,
    pub density: CellField<f64>,
    pub velocity: CellField<f64>,
}

impl FluidState {
    /// Fluid at rest with unit density.
    pub fn new(domain: &BlockDomain) -> Self {
        let mut src = CellField::new(domain, Q19, 0.0);
        for b in 0..domain.num_blocks() {
            let len = src.plane();
            let data = src.block_mut(b);
            for q in 0..Q19 {
                data[q * len..(q + 1) * len].fill(D3Q19_W[q]);
            }
        }
        Self {
            dst: src.clone(),
            src,
            force: CellField::new(domain, 3, 0.0),
            density: CellField::new(domain, 1, 1.0),
            velocity: CellField::new(domain, 3, 0.0),
        }
    }

    pub fn pdfs(&self, b: usize, cell: usize) -> [f64; Q19] {
        let len = self.src.plane();
        let d = self.src.block(b);
        std::array::from_fn(|q| d[q * len + cell])
    }

    pub fn set_pdfs(&mut self, b: usize, cell: usize, f: &[f64; Q19]) {
        let len = self.src.plane();
        let d = self.src.block_mut(b);
        for q in 0..Q19 {
            d[q * len + cell] = f[q];
        }
    }

    pub fn set_equilibrium(&mut self, b: usize, cell: usize, rho: f64, u: [f64; 3]) {
        self.set_pdfs(b, cell, &equilibrium(rho, u));
    }

    /// Density and velocity of a fluid cell. The stored PDFs are
    /// post-collision, so u = Σ f̃ c − f_b/2, which equals the pre-collision
    /// Σ f c + f_b/2 of the same step.
    pub fn cell_macroscopic(&self, b: usize, cell: usize) -> (f64, [f64; 3]) {
        let fb = self.cell_force(b, cell);
        macroscopic(&self.pdfs(b, cell), fb.map(|v| -v))
    }

    pub fn cell_force(&self, b: usize, cell: usize) -> [f64; 3] {
        let len = self.force.plane();
        let d = self.force.block(b);
        [d[cell], d[len + cell], d[2 * len + cell]]
    }

    pub fn swap(&mut self) {
        std::mem::swap(&mut self.src, &mut self.dst);
    }

    pub fn exchange(&mut self, domain: &BlockDomain, periodic: [bool; 3]) {
        self.src.exchange_ghosts(domain, Pattern::FacesEdges, periodic);
    }

    /// Fills the density and velocity fields from the source PDFs (see
    /// [`Self::cell_macroscopic`]); non-fluid cells get (1, 0).
    pub fn update_macroscopic(&mut self, exec: &Executor, domain: &BlockDomain, fl: &CellField<u8>) {
        let layout = *domain.layout();
        let len = layout.len;
        let src = &self.src;
        let force = &self.force;
        let mut pairs: Vec<(&mut Vec<f64>, &mut Vec<f64>)> = self
            .density
            .blocks_mut()
            .iter_mut()
            .zip(self.velocity.blocks_mut().iter_mut())
            .collect();
        exec.for_each_block(&mut pairs, |b, (rho_out, u_out)| {
            let s = src.block(b);
            let fb = force.block(b);
            let fg = fl.block(b);
            for c in layout.owned() {
                let (rho, u) = if fg[c] & flags::FLUID != 0 {
                    let f: [f64; Q19] = std::array::from_fn(|q| s[q * len + c]);
                    macroscopic(&f, [-fb[c], -fb[len + c], -fb[2 * len + c]])
                } else {
                    (1.0, [0.0; 3])
                };
                rho_out[c] = rho;
                for a in 0..3 {
                    u_out[a * len + c] = u[a];
                }
            }
        });
    }

    /// Σ ρ over owned fluid cells (deterministic order).
    pub fn total_mass(&self, exec: &Executor, domain: &BlockDomain, fl: &CellField<u8>) -> f64 {
        global_sum_with(exec, domain, |b, c| {
            if fl.get(b, c, 0) & flags::FLUID != 0 {
                moments(&self.pdfs(b, c)).0
            } else {
                0.0
            }
        })
    }

    /// Σ j (bare momentum) over owned fluid cells.
    pub fn total_momentum(&self, exec: &Executor, domain: &BlockDomain, fl: &CellField<u8>) -> [f64; 3] {
        [0, 1, 2].map(|a| {
            global_sum_with(exec, domain, |b, c| {
                if fl.get(b, c, 0) & flags::FLUID != 0 {
                    moments(&self.pdfs(b, c)).1[a]
                } else {
                    0.0
                }
            })
        })
    }
}

/// Flag field for the flow solver: every cell fluid, ghost cells beyond
/// non-periodic domain faces flagged as walls of the configured kind (no-slip
/// wins where walls of both kinds meet), near-boundary cells marked.
///
/// The wall rules themselves (half-way bounce-back, specular reflection) are
/// applied inside the fused stream-collide sweep when a link reads a wall cell.
pub fn static_boundary_flags(domain: &BlockDomain, bc: [FlowBc; 3]) -> CellField<u8> {
    let periodic = bc.map(|b| b == FlowBc::Periodic);
    let mut fl = CellField::new(domain, 1, flags::FLUID);
    let cells = domain.cells();
    let layout = *domain.layout();
    for b in 0..domain.num_blocks() {
        for c in 0..layout.len {
            let g = domain.global(b, c);
            let mut wall = 0u8;
            for a in 0..3 {
                if !periodic[a] && (g[a] < 0 || g[a] >= cells[a] as i64) {
                    wall |= match bc[a] {
                        FlowBc::NoSlip => flags::NO_SLIP,
                        _ => flags::FREE_SLIP,
                    };
                }
            }
            if wall != 0 {
                let v = if wall & flags::NO_SLIP != 0 { flags::NO_SLIP } else { flags::FREE_SLIP };
                fl.set(b, c, 0, v);
            }
        }
        let all: Vec<usize> = layout.owned().collect();
        update_near_flags(domain, &mut fl, b, all.into_iter());
    }
    fl
}

/// Recomputes the near-boundary bit of the given owned cells of block `b`.
pub fn update_near_flags(domain: &BlockDomain, fl: &mut CellField<u8>, b: usize, cells: impl Iterator<Item = usize>) {
    let layout = *domain.layout();
    let offs: [isize; Q19] = std::array::from_fn(|q| layout.offset(D3Q19_C[q]));
    let data = fl.block_mut(b);
    for c in cells {
        if !layout.is_owned(layout.coords(c)) || data[c] & flags::FLUID == 0 {
            continue;
        }
        let near = offs[1..]
            .iter()
            .any(|&o| data[(c as isize + o) as usize] & flags::FLUID == 0);
        if near {
            data[c] |= flags::NEAR;
        } else {
            data[c] &= !flags::NEAR;
        }
    }
}
