use serde::Serialize;

use super::bc::{adapt_rhs_bc, adapt_stencils_bc, BcRegistry, FaceBc};
use super::flags::{BC, NEAR_BC};
use super::stencil::{assemble_dh_stencil, QuasiConstantStencils, Stencil, StencilStore};
use crate::grid::{global_sum_with, BlockDomain, CellField, Executor, Pattern};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SorConfig {
    pub omega: f64,
    /// Stop once ‖r‖₂ ≤ residual_reduction · ‖r₀‖₂ of the first solve.
    pub residual_reduction: f64,
    pub check_interval: usize,
    pub max_iterations: usize,
    /// Run exactly this many iterations per solve, without residual checks.
    pub fixed_iterations: Option<usize>,
}

impl Default for SorConfig {
    fn default() -> Self {
        Self {
            omega: 1.7,
            residual_reduction: 1e-6,
            check_interval: 1,
            max_iterations: 100_000,
            fixed_iterations: None,
        }
    }
}

impl SorConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.omega > 0.0 && self.omega < 2.0) {
            errs.push(format!("SOR relaxation factor {} outside ]0, 2[", self.omega));
        }
        if !(self.residual_reduction > 0.0) {
            errs.push("residual reduction factor must be positive".into());
        }
        if self.check_interval == 0 {
            errs.push("residual check interval must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// ‖r₀‖₂ of the first solve of the run.
    pub reference_residual: f64,
    /// Number of unknowns, for the RMS residual ‖r‖₂/√n.
    pub unknowns: usize,
}

impl SolveStats {
    pub fn final_rms(&self) -> f64 {
        self.final_residual / (self.unknowns.max(1) as f64).sqrt()
    }

    pub fn initial_rms(&self) -> f64 {
        self.initial_residual / (self.unknowns.max(1) as f64).sqrt()
    }
}

/// Potential field, right-hand side, flags, boundary registry and stencils.
pub struct PotentialSystem<S: StencilStore = QuasiConstantStencils> {
    pub stencils: S,
    base: Stencil,
    /// Right-hand side without boundary contributions.
    pub source: CellField<f64>,
    pub rhs: CellField<f64>,
    pub psi: CellField<f64>,
    pub flags: CellField<u8>,
    pub registry: BcRegistry,
    pub periodic: [bool; 3],
    reference: Option<f64>,
}

impl PotentialSystem<QuasiConstantStencils> {
    pub fn new(domain: &BlockDomain, kappa_l: f64, faces: &[[FaceBc; 2]; 3]) -> Result<Self> {
        let base = assemble_dh_stencil(kappa_l);
        Self::with_store(domain, kappa_l, faces, QuasiConstantStencils::new(domain, base))
    }
}

impl<S: StencilStore> PotentialSystem<S> {
    pub fn with_store(domain: &BlockDomain, kappa_l: f64, faces: &[[FaceBc; 2]; 3], stencils: S) -> Result<Self> {
        if !(kappa_l >= 0.0) {
            return Err(Error::InvalidParameters(vec![format!("kappa_L = {kappa_l} must be non-negative")]));
        }
        let mut flags = CellField::new(domain, 1, 0u8);
        let registry = BcRegistry::with_faces(domain, faces, &mut flags)?;
        Ok(Self {
            stencils,
            base: assemble_dh_stencil(kappa_l),
            source: CellField::new(domain, 1, 0.0),
            rhs: CellField::new(domain, 1, 0.0),
            psi: CellField::new(domain, 1, 0.0),
            flags,
            registry,
            periodic: faces.each_ref().map(|f| matches!(f[0], FaceBc::Periodic)),
            reference: None,
        })
    }

    pub fn base(&self) -> &Stencil {
        &self.base
    }

    pub fn reference_residual(&self) -> Option<f64> {
        self.reference
    }

    /// Overrides (or clears) the frozen reference residual.
    pub fn set_reference_residual(&mut self, r: Option<f64>) {
        self.reference = r;
    }

    /// Resets stencils and right-hand side to their unadapted state and folds
    /// in the current boundary conditions.
    pub fn prepare(&mut self, domain: &BlockDomain) {
        self.stencils.reset(self.base);
        for (r, s) in self.rhs.blocks_mut().iter_mut().zip(self.source.blocks()) {
            r.copy_from_slice(s);
        }
        adapt_stencils_bc(domain, &mut self.stencils, &self.flags);
        adapt_rhs_bc(domain, &mut self.rhs, &mut self.psi, &self.flags, &self.registry);
    }

    pub fn exchange(&mut self, domain: &BlockDomain, pattern: Pattern) {
        self.psi.exchange_ghosts(domain, pattern, self.periodic);
    }

    pub fn unknowns(&self, exec: &Executor, domain: &BlockDomain) -> usize {
        global_sum_with(exec, domain, |b, c| if self.flags.get(b, c, 0) & BC == 0 { 1.0 } else { 0.0 }) as usize
    }

    /// Residual norm of the current iterate (ghosts refreshed first).
    pub fn residual(&mut self, exec: &Executor, domain: &BlockDomain) -> f64 {
        self.exchange(domain, Pattern::Faces);
        residual_l2(exec, domain, &self.stencils, &self.rhs, &self.psi, &self.flags)
    }

    /// Folds the boundary conditions and iterates red-black SOR from the
    /// current `psi` until the residual falls below the reduction target
    /// relative to the first solve, or for a fixed iteration count.
    pub fn solve(&mut self, exec: &Executor, domain: &BlockDomain, cfg: &SorConfig) -> Result<SolveStats> {
        cfg.validate()?;
        self.prepare(domain);
        let initial = self.residual(exec, domain);
        let reference = *self.reference.get_or_insert(initial);
        let unknowns = self.unknowns(exec, domain);
        let mut stats = SolveStats {
            iterations: 0,
            initial_residual: initial,
            final_residual: initial,
            reference_residual: reference,
            unknowns,
        };
        let sweep = |s: &mut Self| {
            sor_iteration_red_black(exec, domain, &s.stencils, &s.rhs, &mut s.psi, &s.flags, s.periodic, cfg.omega)
        };
        if let Some(n) = cfg.fixed_iterations {
            for _ in 0..n {
                sweep(self);
            }
            stats.iterations = n;
            stats.final_residual = self.residual(exec, domain);
            return Ok(stats);
        }
        let target = cfg.residual_reduction * reference;
        let mut r = initial;
        let mut it = 0;
        while r > target {
            if it >= cfg.max_iterations {
                return Err(Error::NotConverged {
                    iterations: it,
                    residual: r,
                    target,
                });
            }
            sweep(self);
            it += 1;
            if it % cfg.check_interval == 0 || it == cfg.max_iterations {
                r = self.residual(exec, domain);
                if !r.is_finite() {
                    return Err(Error::NotConverged {
                        iterations: it,
                        residual: r,
                        target,
                    });
                }
            }
        }
        stats.iterations = it;
        stats.final_residual = r;
        Ok(stats)
    }
}

/// Updated value of one unknown from its stencil row (fast path for cells on
/// the base stencil, whose off-centre entries are all −1).
#[inline(always)]
fn row_solution(p: &[f64], c: usize, sy: usize, sz: usize, rhs: f64, base_center: f64, st: Option<&Stencil>) -> f64 {
    match st {
        None => {
            let s = p[c + 1] + p[c - 1] + p[c + sy] + p[c - sy] + p[c + sz] + p[c - sz];
            (rhs + s) / base_center
        }
        Some(st) => {
            let acc = st[1] * p[c + 1] + st[2] * p[c - 1] + st[3] * p[c + sy] + st[4] * p[c - sy] + st[5] * p[c + sz]
                + st[6] * p[c - sz];
            (rhs - acc) / st[0]
        }
    }
}

#[inline(always)]
fn row_apply(p: &[f64], c: usize, sy: usize, sz: usize, base_center: f64, st: Option<&Stencil>) -> f64 {
    match st {
        None => base_center * p[c] - p[c + 1] - p[c - 1] - p[c + sy] - p[c - sy] - p[c + sz] - p[c - sz],
        Some(st) => {
            st[0] * p[c] + st[1] * p[c + 1] + st[2] * p[c - 1] + st[3] * p[c + sy] + st[4] * p[c - sy] + st[5] * p[c + sz]
                + st[6] * p[c - sz]
        }
    }
}

fn half_sweep<S: StencilStore>(
    exec: &Executor,
    domain: &BlockDomain,
    store: &S,
    rhs: &CellField<f64>,
    psi: &mut CellField<f64>,
    flags: &CellField<u8>,
    omega: f64,
    color: i64,
) {
    let layout = *domain.layout();
    let [nx, ny, nz] = layout.n;
    let (sy, sz) = (layout.sy, layout.sz);
    let center = store.base()[0];
    exec.for_each_block(psi.blocks_mut(), |b, p| {
        let fl = flags.block(b);
        let r = rhs.block(b);
        let o = domain.block(b).origin;
        for z in 0..nz {
            for y in 0..ny {
                let row = layout.idx(0, y as isize, z as isize);
                let x0 = (color - o[0] - o[1] - o[2] - y as i64 - z as i64).rem_euclid(2) as usize;
                for x in (x0..nx).step_by(2) {
                    let c = row + x;
                    let f = fl[c];
                    if f & BC != 0 {
                        continue;
                    }
                    let new = row_solution(p, c, sy, sz, r[c], center, store.lookup(b, c, f & NEAR_BC != 0));
                    p[c] += omega * (new - p[c]);
                }
            }
        }
    });
}

/// One red-black SOR iteration: cells with even x+y+z, ghost exchange, cells
/// with odd x+y+z, ghost exchange. Boundary cells are not touched.
#[allow(clippy::too_many_arguments)]
pub fn sor_iteration_red_black<S: StencilStore>(
    exec: &Executor,
    domain: &BlockDomain,
    store: &S,
    rhs: &CellField<f64>,
    psi: &mut CellField<f64>,
    flags: &CellField<u8>,
    periodic: [bool; 3],
    omega: f64,
) {
    for color in 0..2 {
        half_sweep(exec, domain, store, rhs, psi, flags, omega, color);
        psi.exchange_ghosts(domain, Pattern::Faces, periodic);
    }
}

/// ‖rhs − Aψ‖₂ over all non-boundary cells; ghosts of `psi` must be current.
pub fn residual_l2<S: StencilStore>(
    exec: &Executor,
    domain: &BlockDomain,
    store: &S,
    rhs: &CellField<f64>,
    psi: &CellField<f64>,
    flags: &CellField<u8>,
) -> f64 {
    let layout = *domain.layout();
    let (sy, sz) = (layout.sy, layout.sz);
    let center = store.base()[0];
    global_sum_with(exec, domain, |b, c| {
        let f = flags.get(b, c, 0);
        if f & BC != 0 {
            return 0.0;
        }
        let p = psi.block(b);
        let r = rhs.block(b)[c] - row_apply(p, c, sy, sz, center, store.lookup(b, c, f & NEAR_BC != 0));
        r * r
    })
    .sqrt()
}
