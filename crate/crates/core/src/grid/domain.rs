use crate::{Error, Result};

/// Index arithmetic of one block including its single ghost layer.
/// Local coordinates run from -1 to n inclusive; x is fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub n: [usize; 3],
    pub sy: usize,
    pub sz: usize,
    pub len: usize,
}

impl BlockLayout {
    pub fn new(n: [usize; 3]) -> Self {
        let sy = n[0] + 2;
        let sz = sy * (n[1] + 2);
        Self {
            n,
            sy,
            sz,
            len: sz * (n[2] + 2),
        }
    }

    #[inline(always)]
    pub fn idx(&self, x: isize, y: isize, z: isize) -> usize {
        ((z + 1) as usize) * self.sz + ((y + 1) as usize) * self.sy + (x + 1) as usize
    }

    #[inline(always)]
    pub fn offset(&self, c: [i32; 3]) -> isize {
        c[0] as isize + c[1] as isize * self.sy as isize + c[2] as isize * self.sz as isize
    }

    /// Local coordinates of a linear index.
    #[inline]
    pub fn coords(&self, idx: usize) -> [isize; 3] {
        let z = idx / self.sz;
        let r = idx % self.sz;
        [(r % self.sy) as isize - 1, (r / self.sy) as isize - 1, z as isize - 1]
    }

    #[inline]
    pub fn is_owned(&self, p: [isize; 3]) -> bool {
        (0..3).all(|a| p[a] >= 0 && p[a] < self.n[a] as isize)
    }

    #[inline]
    pub fn contains(&self, p: [isize; 3]) -> bool {
        (0..3).all(|a| p[a] >= -1 && p[a] <= self.n[a] as isize)
    }

    pub fn owned_cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    /// Linear indices of all owned cells in storage order.
    pub fn owned(&self) -> impl Iterator<Item = usize> + '_ {
        let [nx, ny, nz] = self.n;
        (0..nz).flat_map(move |z| {
            (0..ny).flat_map(move |y| {
                let row = self.idx(0, y as isize, z as isize);
                row..row + nx
            })
        })
    }
}

/// Position of a block in the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockInfo {
    pub index: usize,
    pub coords: [usize; 3],
    /// Global coordinates of the block's first owned cell.
    pub origin: [i64; 3],
}

/// Cartesian domain split into equally sized blocks with one ghost layer each.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDomain {
    cells: [usize; 3],
    blocks: [usize; 3],
    periodic: [bool; 3],
    layout: BlockLayout,
    infos: Vec<BlockInfo>,
}

impl BlockDomain {
    pub fn new(cells: [usize; 3], blocks: [usize; 3], periodic: [bool; 3]) -> Result<Self> {
        let mut n = [0; 3];
        for a in 0..3 {
            if cells[a] == 0 || blocks[a] == 0 || cells[a] % blocks[a] != 0 {
                return Err(Error::Domain(format!(
                    "axis {a}: {} cells cannot be split into {} equal blocks",
                    cells[a], blocks[a]
                )));
            }
            n[a] = cells[a] / blocks[a];
        }
        let mut infos = Vec::new();
        for bz in 0..blocks[2] {
            for by in 0..blocks[1] {
                for bx in 0..blocks[0] {
                    let coords = [bx, by, bz];
                    infos.push(BlockInfo {
                        index: infos.len(),
                        coords,
                        origin: [0, 1, 2].map(|a| (coords[a] * n[a]) as i64),
                    });
                }
            }
        }
        Ok(Self {
            cells,
            blocks,
            periodic,
            layout: BlockLayout::new(n),
            infos,
        })
    }

    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    pub fn blocks(&self) -> [usize; 3] {
        self.blocks
    }

    pub fn periodic(&self) -> [bool; 3] {
        self.periodic
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn num_blocks(&self) -> usize {
        self.infos.len()
    }

    pub fn block(&self, b: usize) -> &BlockInfo {
        &self.infos[b]
    }

    pub fn block_infos(&self) -> &[BlockInfo] {
        &self.infos
    }

    pub fn total_cells(&self) -> usize {
        self.cells.iter().product()
    }

    fn block_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.blocks[0] * (c[1] + self.blocks[1] * c[2])
    }

    /// Neighbor block in direction `d` (components in -1..=1) under the given
    /// periodicity, or `None` at a non-periodic domain face.
    pub fn neighbor(&self, b: usize, d: [i32; 3], periodic: [bool; 3]) -> Option<usize> {
        let c = self.infos[b].coords;
        let mut nc = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as i64 + d[a] as i64;
            let nb = self.blocks[a] as i64;
            nc[a] = if v < 0 || v >= nb {
                if !periodic[a] {
                    return None;
                }
                v.rem_euclid(nb) as usize
            } else {
                v as usize
            };
        }
        Some(self.block_index(nc))
    }

    /// Global coordinates of a local cell index of block `b` (ghosts give
    /// coordinates outside `0..cells`).
    #[inline]
    pub fn global(&self, b: usize, idx: usize) -> [i64; 3] {
        let p = self.layout.coords(idx);
        let o = self.infos[b].origin;
        [o[0] + p[0] as i64, o[1] + p[1] as i64, o[2] + p[2] as i64]
    }

    /// True if the global coordinate lies outside the domain along an axis
    /// that is not periodic under `periodic`.
    #[inline]
    pub fn outside(&self, g: [i64; 3], periodic: [bool; 3]) -> bool {
        (0..3).any(|a| !periodic[a] && (g[a] < 0 || g[a] >= self.cells[a] as i64))
    }

    /// Owning block and local index of a global cell (periodic wrap applied on
    /// periodic axes of the domain).
    pub fn locate(&self, g: [i64; 3]) -> Option<(usize, usize)> {
        let mut w = [0usize; 3];
        for a in 0..3 {
            let n = self.cells[a] as i64;
            let v = if self.periodic[a] { g[a].rem_euclid(n) } else { g[a] };
            if v < 0 || v >= n {
                return None;
            }
            w[a] = v as usize;
        }
        let n = self.layout.n;
        let bc = [w[0] / n[0], w[1] / n[1], w[2] / n[2]];
        let b = self.block_index(bc);
        let idx = self.layout.idx(
            (w[0] % n[0]) as isize,
            (w[1] % n[1]) as isize,
            (w[2] % n[2]) as isize,
        );
        Some((b, idx))
    }

    /// Range of local coordinates of block `b` (ghosts included) intersecting
    /// the global box `[lo, hi]`, per axis; `None` if empty.
    pub fn local_range(&self, b: usize, lo: [i64; 3], hi: [i64; 3]) -> Option<[(isize, isize); 3]> {
        let o = self.infos[b].origin;
        let mut r = [(0isize, 0isize); 3];
        for a in 0..3 {
            let l = (lo[a] - o[a]).max(-1);
            let h = (hi[a] - o[a]).min(self.layout.n[a] as i64);
            if l > h {
                return None;
            }
            r[a] = (l as isize, h as isize);
        }
        Some(r)
    }
}
