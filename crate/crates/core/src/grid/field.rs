use super::domain::{BlockDomain, BlockLayout};

/// Neighborhood that a ghost exchange has to serve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Face neighbors only (D3Q7 kernels).
    Faces,
    /// Faces and edges (D3Q19 kernels).
    FacesEdges,
    /// Faces, edges and corners.
    Full,
}

impl Pattern {
    fn max_nonzero(self) -> usize {
        match self {
            Pattern::Faces => 1,
            Pattern::FacesEdges => 2,
            Pattern::Full => 3,
        }
    }

    pub fn directions(self) -> Vec<[i32; 3]> {
        let mut out = Vec::new();
        for z in -1..=1 {
            for y in -1..=1 {
                for x in -1..=1 {
                    let d = [x, y, z];
                    let nz = d.iter().filter(|&&v| v != 0).count();
                    if nz > 0 && nz <= self.max_nonzero() {
                        out.push(d);
                    }
                }
            }
        }
        out
    }
}

/// Per-block storage of `arity` values per cell, ghost layer included.
/// Components are stored as separate planes: `data[comp * len + cell]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField<T> {
    arity: usize,
    layout: BlockLayout,
    blocks: Vec<Vec<T>>,
}

impl<T: Copy + Send + Sync> CellField<T> {
    pub fn new(domain: &BlockDomain, arity: usize, init: T) -> Self {
        let layout = *domain.layout();
        Self {
            arity,
            layout,
            blocks: vec![vec![init; arity * layout.len]; domain.num_blocks()],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    /// Cells per component plane (ghosts included).
    #[inline(always)]
    pub fn plane(&self) -> usize {
        self.layout.len
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    #[inline(always)]
    pub fn block(&self, b: usize) -> &[T] {
        &self.blocks[b]
    }

    #[inline(always)]
    pub fn block_mut(&mut self, b: usize) -> &mut [T] {
        &mut self.blocks[b]
    }

    pub fn blocks(&self) -> &[Vec<T>] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.blocks
    }

    #[inline(always)]
    pub fn get(&self, b: usize, cell: usize, comp: usize) -> T {
        self.blocks[b][comp * self.layout.len + cell]
    }

    #[inline(always)]
    pub fn set(&mut self, b: usize, cell: usize, comp: usize, v: T) {
        let len = self.layout.len;
        self.blocks[b][comp * len + cell] = v;
    }

    pub fn fill(&mut self, v: T) {
        for blk in &mut self.blocks {
            blk.iter_mut().for_each(|x| *x = v);
        }
    }

    /// Copies owned boundary values of neighboring blocks into the ghost
    /// layers. Ghosts at non-periodic domain faces are left untouched.
    pub fn exchange_ghosts(&mut self, domain: &BlockDomain, pattern: Pattern, periodic: [bool; 3]) {
        let dirs = pattern.directions();
        let n = self.layout.n;
        let len = self.layout.len;
        for b in 0..self.blocks.len() {
            for d in &dirs {
                let Some(nb) = domain.neighbor(b, *d, periodic) else {
                    continue;
                };
                let mut dst = [(0isize, 0isize); 3];
                let mut src = [0isize; 3];
                for a in 0..3 {
                    let na = n[a] as isize;
                    (dst[a], src[a]) = match d[a] {
                        -1 => ((-1, -1), na - 1),
                        1 => ((na, na), 0),
                        _ => ((0, na - 1), 0),
                    };
                }
                let row = (dst[0].1 - dst[0].0 + 1) as usize;
                for z in dst[2].0..=dst[2].1 {
                    let sz = src[2] + (z - dst[2].0);
                    for y in dst[1].0..=dst[1].1 {
                        let sy = src[1] + (y - dst[1].0);
                        let di = self.layout.idx(dst[0].0, y, z);
                        let si = self.layout.idx(src[0], sy, sz);
                        for c in 0..self.arity {
                            let (di, si) = (di + c * len, si + c * len);
                            if nb == b {
                                self.blocks[b].copy_within(si..si + row, di);
                            } else {
                                let (dv, sv) = pair_mut(&mut self.blocks, b, nb);
                                dv[di..di + row].copy_from_slice(&sv[si..si + row]);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn pair_mut<T>(v: &mut [Vec<T>], a: usize, b: usize) -> (&mut [T], &[T]) {
    debug_assert_ne!(a, b);
    if a < b {
        let (l, r) = v.split_at_mut(b);
        (&mut l[a], &r[0])
    } else {
        let (l, r) = v.split_at_mut(a);
        (&mut r[0], &l[b])
    }
}
