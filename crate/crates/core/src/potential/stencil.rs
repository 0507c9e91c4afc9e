use crate::grid::BlockDomain;

/// Seven-point stencil in D3Q7 order: centre, +x, −x, +y, −y, +z, −z.
pub type Stencil = [f64; 7];

/// Stencil of −Δ + κ² in lattice units (dx = 1).
pub fn assemble_dh_stencil(kappa_l: f64) -> Stencil {
    [6.0 + kappa_l * kappa_l, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0]
}

/// Storage of the system matrix.
pub trait StencilStore: Sync {
    fn base(&self) -> &Stencil;
    /// Drops all boundary adaptations.
    fn reset(&mut self, base: Stencil);
    /// Records the adapted stencil of a cell. Calls for one block come in
    /// increasing cell order.
    fn set(&mut self, b: usize, cell: usize, s: Stencil);
    /// Stencil of a cell if it differs from the base one, or if the store
    /// keeps every stencil explicitly. `near` is the cell's near-boundary flag.
    fn lookup(&self, b: usize, cell: usize, near: bool) -> Option<&Stencil>;
}

/// One shared stencil plus sparse per-cell overrides at near-boundary cells.
#[derive(Debug, Clone)]
pub struct QuasiConstantStencils {
    base: Stencil,
    overrides: Vec<Vec<(usize, Stencil)>>,
}

impl QuasiConstantStencils {
    pub fn new(domain: &BlockDomain, base: Stencil) -> Self {
        Self {
            base,
            overrides: vec![Vec::new(); domain.num_blocks()],
        }
    }

    pub fn overrides(&self, b: usize) -> &[(usize, Stencil)] {
        &self.overrides[b]
    }

    pub fn num_overrides(&self) -> usize {
        self.overrides.iter().map(Vec::len).sum()
    }
}

impl StencilStore for QuasiConstantStencils {
    fn base(&self) -> &Stencil {
        &self.base
    }

    fn reset(&mut self, base: Stencil) {
        self.base = base;
        self.overrides.iter_mut().for_each(Vec::clear);
    }

    fn set(&mut self, b: usize, cell: usize, s: Stencil) {
        let list = &mut self.overrides[b];
        debug_assert!(list.last().is_none_or(|&(c, _)| c < cell));
        list.push((cell, s));
    }

    #[inline]
    fn lookup(&self, b: usize, cell: usize, near: bool) -> Option<&Stencil> {
        if !near {
            return None;
        }
        let list = &self.overrides[b];
        list.binary_search_by_key(&cell, |&(c, _)| c).ok().map(|i| &list[i].1)
    }
}

/// Explicit stencil for every cell; reference representation for tests.
#[derive(Debug, Clone)]
pub struct FullStencils {
    base: Stencil,
    cells: Vec<Vec<Stencil>>,
}

impl FullStencils {
    pub fn new(domain: &BlockDomain, base: Stencil) -> Self {
        Self {
            base,
            cells: vec![vec![base; domain.layout().len]; domain.num_blocks()],
        }
    }
}

impl StencilStore for FullStencils {
    fn base(&self) -> &Stencil {
        &self.base
    }

    fn reset(&mut self, base: Stencil) {
        self.base = base;
        self.cells.iter_mut().for_each(|v| v.fill(base));
    }

    fn set(&mut self, b: usize, cell: usize, s: Stencil) {
        self.cells[b][cell] = s;
    }

    fn lookup(&self, b: usize, cell: usize, _near: bool) -> Option<&Stencil> {
        Some(&self.cells[b][cell])
    }
}
