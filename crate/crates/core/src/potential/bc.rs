use std::fmt;
use std::sync::Arc;

use super::flags::{BC, DIRICHLET, NEAR_BC, NEUMANN, PARTICLE};
use super::stencil::StencilStore;
use crate::grid::dirs::{D3Q7_C, Q7};
use crate::grid::{BlockDomain, CellField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Potential value on the cell face.
    Dirichlet,
    /// Outward normal derivative across the cell face (lattice units).
    Neumann,
}

/// Boundary values of one kind, stored per block as (cell, value) lists.
#[derive(Debug, Clone, PartialEq)]
pub struct BcClass {
    pub kind: BcKind,
    pub cells: Vec<Vec<(usize, f64)>>,
}

impl BcClass {
    pub fn new(kind: BcKind, blocks: usize) -> Self {
        Self {
            kind,
            cells: vec![Vec::new(); blocks],
        }
    }

    pub fn clear(&mut self) {
        self.cells.iter_mut().for_each(Vec::clear);
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Boundary condition on a domain face.
#[derive(Clone)]
pub enum FaceBc {
    Periodic,
    Dirichlet(f64),
    Neumann(f64),
    /// Dirichlet value evaluated at each face centre (global lattice coordinates).
    DirichletFn(Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>),
}

impl fmt::Debug for FaceBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaceBc::Periodic => write!(f, "Periodic"),
            FaceBc::Dirichlet(v) => write!(f, "Dirichlet({v})"),
            FaceBc::Neumann(v) => write!(f, "Neumann({v})"),
            FaceBc::DirichletFn(_) => write!(f, "DirichletFn"),
        }
    }
}

/// All boundary values known to the potential solver: static ones on domain
/// faces and the Dirichlet cells of charged particles.
#[derive(Debug, Clone, PartialEq)]
pub struct BcRegistry {
    pub dirichlet: BcClass,
    pub neumann: BcClass,
    pub particles: BcClass,
}

impl BcRegistry {
    pub fn new(blocks: usize) -> Self {
        Self {
            dirichlet: BcClass::new(BcKind::Dirichlet, blocks),
            neumann: BcClass::new(BcKind::Neumann, blocks),
            particles: BcClass::new(BcKind::Dirichlet, blocks),
        }
    }

    /// Registers the domain-face conditions (`faces[axis][0]` low, `[1]` high)
    /// on the face ghost cells, flags them and marks the adjacent cells.
    pub fn with_faces(domain: &BlockDomain, faces: &[[FaceBc; 2]; 3], flags: &mut CellField<u8>) -> Result<Self> {
        for (a, pair) in faces.iter().enumerate() {
            let p = pair.iter().filter(|f| matches!(f, FaceBc::Periodic)).count();
            if p == 1 {
                return Err(Error::Domain(format!("axis {a}: periodic on one face only")));
            }
        }
        let mut reg = Self::new(domain.num_blocks());
        let cells = domain.cells();
        let layout = *domain.layout();
        for b in 0..domain.num_blocks() {
            for c in 0..layout.len {
                let g = domain.global(b, c);
                let out: Vec<(usize, usize)> = (0..3)
                    .filter_map(|a| {
                        if g[a] < 0 {
                            Some((a, 0))
                        } else if g[a] >= cells[a] as i64 {
                            Some((a, 1))
                        } else {
                            None
                        }
                    })
                    .collect();
                // edge and corner ghosts are never read by the D3Q7 operator
                let [(a, side)] = out[..] else { continue };
                let mut face = [0, 1, 2].map(|k| g[k] as f64 + 0.5);
                face[a] = if side == 0 { 0.0 } else { cells[a] as f64 };
                match &faces[a][side] {
                    FaceBc::Periodic => {}
                    FaceBc::Dirichlet(v) => {
                        reg.dirichlet.cells[b].push((c, *v));
                        flags.set(b, c, 0, DIRICHLET);
                    }
                    FaceBc::DirichletFn(f) => {
                        reg.dirichlet.cells[b].push((c, f(face)));
                        flags.set(b, c, 0, DIRICHLET);
                    }
                    FaceBc::Neumann(v) => {
                        reg.neumann.cells[b].push((c, *v));
                        flags.set(b, c, 0, NEUMANN);
                    }
                }
            }
            let owned: Vec<usize> = layout.owned().collect();
            update_near_bc(domain, flags, b, owned.into_iter());
        }
        Ok(reg)
    }

    pub fn classes(&self) -> [&BcClass; 3] {
        [&self.dirichlet, &self.neumann, &self.particles]
    }

    /// Checks that every boundary-flagged cell has a registered value.
    pub fn validate(&self, domain: &BlockDomain, flags: &CellField<u8>) -> Result<()> {
        for b in 0..domain.num_blocks() {
            let mut known: Vec<usize> = self.classes().iter().flat_map(|k| k.cells[b].iter().map(|e| e.0)).collect();
            known.sort_unstable();
            for c in 0..domain.layout().len {
                if flags.get(b, c, 0) & BC != 0 && known.binary_search(&c).is_err() {
                    return Err(Error::Domain(format!(
                        "block {b}: cell {:?} carries a boundary flag without registered value",
                        domain.global(b, c)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Recomputes the near-boundary flag of the given owned, non-boundary cells.
pub fn update_near_bc(domain: &BlockDomain, flags: &mut CellField<u8>, b: usize, cells: impl Iterator<Item = usize>) {
    let layout = *domain.layout();
    let offs: [isize; Q7] = std::array::from_fn(|q| layout.offset(D3Q7_C[q]));
    let data = flags.block_mut(b);
    for c in cells {
        if !layout.is_owned(layout.coords(c)) || data[c] & BC != 0 {
            continue;
        }
        if offs[1..].iter().any(|&o| data[(c as isize + o) as usize] & BC != 0) {
            data[c] |= NEAR_BC;
        } else {
            data[c] &= !NEAR_BC;
        }
    }
}

/// Folds the boundary conditions into the stencils of all near-boundary
/// cells: a Dirichlet neighbour (value on the shared face, ghost value
/// 2g − ψ) removes the coupling and adds 1 to the centre; a Neumann neighbour
/// (ghost value ψ + g) removes the coupling and subtracts 1.
pub fn adapt_stencils_bc<S: StencilStore>(domain: &BlockDomain, store: &mut S, flags: &CellField<u8>) {
    let layout = *domain.layout();
    let offs: [isize; Q7] = std::array::from_fn(|q| layout.offset(D3Q7_C[q]));
    let base = *store.base();
    for b in 0..domain.num_blocks() {
        let fl = flags.block(b);
        for c in layout.owned() {
            if fl[c] & NEAR_BC == 0 {
                continue;
            }
            let mut s = base;
            for q in 1..Q7 {
                let nf = fl[(c as isize + offs[q]) as usize];
                if nf & DIRICHLET != 0 {
                    s[q] = 0.0;
                    s[0] += 1.0;
                } else if nf & NEUMANN != 0 {
                    s[q] = 0.0;
                    s[0] -= 1.0;
                }
            }
            store.set(b, c, s);
        }
    }
}

/// Writes the registered boundary values into `psi` at the boundary cells
/// and adds their contributions (2g for Dirichlet, g for Neumann) to the
/// right-hand side of the adjacent cells.
pub fn adapt_rhs_bc(
    domain: &BlockDomain,
    rhs: &mut CellField<f64>,
    psi: &mut CellField<f64>,
    flags: &CellField<u8>,
    registry: &BcRegistry,
) {
    for class in registry.classes() {
        for (b, list) in class.cells.iter().enumerate() {
            let p = psi.block_mut(b);
            for &(c, v) in list {
                p[c] = v;
            }
        }
    }
    let layout = *domain.layout();
    let offs: [isize; Q7] = std::array::from_fn(|q| layout.offset(D3Q7_C[q]));
    for b in 0..domain.num_blocks() {
        let fl = flags.block(b);
        let p = psi.block(b);
        let r = rhs.block_mut(b);
        for c in layout.owned() {
            if fl[c] & NEAR_BC == 0 {
                continue;
            }
            for &o in &offs[1..] {
                let n = (c as isize + o) as usize;
                if fl[n] & DIRICHLET != 0 {
                    r[c] += 2.0 * p[n];
                } else if fl[n] & NEUMANN != 0 {
                    r[c] += p[n];
                }
            }
        }
    }
}

/// Clears particle boundary cells (flags and values) ahead of a new mapping.
pub fn clear_particle_bc(flags: &mut CellField<u8>, registry: &mut BcRegistry) {
    for (b, list) in registry.particles.cells.iter().enumerate() {
        let fl = flags.block_mut(b);
        for &(c, _) in list {
            fl[c] &= !(DIRICHLET | PARTICLE);
        }
    }
    registry.particles.clear();
}
