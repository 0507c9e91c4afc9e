use rayon::prelude::*;

use super::domain::BlockDomain;
use super::field::CellField;
use crate::Result;

/// Thread pool on which all block-parallel sweeps run.
pub struct Executor {
    pool: rayon::ThreadPool,
}

impl Executor {
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        self.pool.install(op)
    }

    /// Applies `f` to every item (one per block) in parallel.
    pub fn for_each_block<T: Send, F>(&self, items: &mut [T], f: F)
    where
        F: Fn(usize, &mut T) + Sync + Send,
    {
        self.pool.install(|| {
            items.par_iter_mut().enumerate().with_max_len(1).for_each(|(b, t)| f(b, t))
        });
    }

    /// Evaluates `f` for blocks `0..n` in parallel; results in block order.
    pub fn map_blocks<R: Send, F>(&self, n: usize, f: F) -> Vec<R>
    where
        F: Fn(usize) -> R + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().with_max_len(1).map(f).collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CellCtx {
    pub block: usize,
    pub cell: usize,
    pub global: [i64; 3],
}

const MAX_ARITY: usize = 32;

/// Applies `kernel` to the values of every owned cell of every block.
pub fn run_sweep<T, F>(exec: &Executor, domain: &BlockDomain, field: &mut CellField<T>, kernel: F)
where
    T: Copy + Default + Send + Sync,
    F: Fn(&CellCtx, &mut [T]) + Sync + Send,
{
    sweep_impl(exec, domain, field, None, kernel)
}

/// As [`run_sweep`], skipping cells whose `mask` value has any of `skip` bits set.
pub fn run_sweep_masked<T, F>(
    exec: &Executor,
    domain: &BlockDomain,
    field: &mut CellField<T>,
    mask: &CellField<u8>,
    skip: u8,
    kernel: F,
) where
    T: Copy + Default + Send + Sync,
    F: Fn(&CellCtx, &mut [T]) + Sync + Send,
{
    sweep_impl(exec, domain, field, Some((mask, skip)), kernel)
}

fn sweep_impl<T, F>(
    exec: &Executor,
    domain: &BlockDomain,
    field: &mut CellField<T>,
    mask: Option<(&CellField<u8>, u8)>,
    kernel: F,
) where
    T: Copy + Default + Send + Sync,
    F: Fn(&CellCtx, &mut [T]) + Sync + Send,
{
    let arity = field.arity();
    assert!(arity <= MAX_ARITY, "arity {arity} exceeds sweep buffer");
    let len = field.plane();
    let layout = *domain.layout();
    exec.for_each_block(field.blocks_mut(), |b, data| {
        let mut buf = [T::default(); MAX_ARITY];
        for cell in layout.owned() {
            if let Some((m, skip)) = mask {
                if m.get(b, cell, 0) & skip != 0 {
                    continue;
                }
            }
            for c in 0..arity {
                buf[c] = data[c * len + cell];
            }
            let ctx = CellCtx {
                block: b,
                cell,
                global: domain.global(b, cell),
            };
            kernel(&ctx, &mut buf[..arity]);
            for c in 0..arity {
                data[c * len + cell] = buf[c];
            }
        }
    });
}

/// Deterministic sum of a per-cell quantity over all owned cells: per-block
/// partial sums in storage order, combined in block-index order.
pub fn global_sum_with<F>(exec: &Executor, domain: &BlockDomain, value: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let layout = *domain.layout();
    exec.map_blocks(domain.num_blocks(), |b| layout.owned().map(|c| value(b, c)).sum::<f64>())
        .into_iter()
        .fold(0.0, |acc, p| acc + p)
}

/// L2 norm of a per-cell quantity, with the same ordering guarantees as
/// [`global_sum_with`].
pub fn global_l2_with<F>(exec: &Executor, domain: &BlockDomain, value: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    global_sum_with(exec, domain, |b, c| {
        let v = value(b, c);
        v * v
    })
    .sqrt()
}

/// L2 norm over all components of the owned cells of a field.
pub fn global_l2(exec: &Executor, domain: &BlockDomain, field: &CellField<f64>) -> f64 {
    let len = field.plane();
    let arity = field.arity();
    global_sum_with(exec, domain, |b, c| {
        let d = field.block(b);
        (0..arity).map(|k| d[k * len + c] * d[k * len + c]).sum()
    })
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Pattern;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn add_one_touches_each_owned_cell_once() {
        let d = BlockDomain::new([8, 8, 8], [2, 2, 1], [false; 3]).unwrap();
        let ex = Executor::new(2).unwrap();
        let mut f = CellField::new(&d, 1, 0.0f64);
        run_sweep(&ex, &d, &mut f, |_, v| v[0] += 1.0);
        let total: f64 = f.blocks().iter().flatten().sum();
        assert_eq!(total, 512.0);
        assert_eq!(global_l2(&ex, &d, &f), 512f64.sqrt());
    }

    #[test]
    fn masked_sweep_skips_cells() {
        let d = BlockDomain::new([8, 8, 8], [2, 1, 1], [false; 3]).unwrap();
        let ex = Executor::new(1).unwrap();
        let mut mask = CellField::new(&d, 1, 0u8);
        let mut masked = 0;
        for b in 0..2 {
            for c in d.layout().owned().collect::<Vec<_>>() {
                let g = d.global(b, c);
                if (g[0] - 4).pow(2) + (g[1] - 4).pow(2) + (g[2] - 4).pow(2) <= 4 {
                    mask.set(b, c, 0, 8);
                    masked += 1;
                }
            }
        }
        let mut f = CellField::new(&d, 1, 0u32);
        run_sweep_masked(&ex, &d, &mut f, &mask, 8, |_, v| v[0] += 1);
        let count: u32 = f.blocks().iter().flatten().sum();
        assert_eq!(count as usize, 512 - masked);
    }

    #[test]
    fn l2_examples() {
        let d = BlockDomain::new([4, 4, 4], [1, 1, 1], [false; 3]).unwrap();
        let ex = Executor::new(1).unwrap();
        let mut f = CellField::new(&d, 1, 0.0);
        assert_eq!(global_l2(&ex, &d, &f), 0.0);
        f.set(0, d.layout().idx(1, 2, 3), 0, 3.0);
        // ghost values do not count
        f.set(0, d.layout().idx(-1, 2, 3), 0, 7.0);
        assert_eq!(global_l2(&ex, &d, &f), 3.0);
    }

    #[test]
    fn l2_independent_of_threads_and_close_to_sequential() {
        let d = BlockDomain::new([16, 12, 8], [2, 3, 2], [false; 3]).unwrap();
        let mut f = CellField::new(&d, 1, 0.0);
        let mut seed = 7;
        let mut reference = 0.0;
        let mut global = vec![0.0; 16 * 12 * 8];
        for b in 0..d.num_blocks() {
            for c in d.layout().owned().collect::<Vec<_>>() {
                let v = lcg(&mut seed);
                f.set(b, c, 0, v);
                let g = d.global(b, c);
                global[(g[0] + 16 * (g[1] + 12 * g[2])) as usize] = v;
            }
        }
        for v in &global {
            reference += v * v;
        }
        let r1 = global_l2(&Executor::new(1).unwrap(), &d, &f);
        let r2 = global_l2(&Executor::new(2).unwrap(), &d, &f);
        let r8 = global_l2(&Executor::new(8).unwrap(), &d, &f);
        assert_eq!(r1.to_bits(), r2.to_bits());
        assert_eq!(r1.to_bits(), r8.to_bits());
        assert!((r1 - reference.sqrt()).abs() <= 1e-13 * r1);
    }

    #[test]
    fn decomposed_stencil_matches_undecomposed() {
        let cells = [12, 8, 6];
        let single = BlockDomain::new(cells, [1, 1, 1], [true, false, true]).unwrap();
        let split = BlockDomain::new(cells, [3, 2, 2], [true, false, true]).unwrap();
        let ex = Executor::new(3).unwrap();
        let value = |g: [i64; 3]| if (g[0] + g[1] + g[2]) % 2 == 0 { 1.0 } else { -0.5 + g[0] as f64 * 0.01 };
        let apply = |d: &BlockDomain| {
            let mut f = CellField::new(d, 1, 0.0);
            for b in 0..d.num_blocks() {
                for c in d.layout().owned().collect::<Vec<_>>() {
                    f.set(b, c, 0, value(d.global(b, c)));
                }
            }
            f.exchange_ghosts(d, Pattern::Faces, d.periodic());
            let l = *d.layout();
            let mut out = std::collections::BTreeMap::new();
            for b in 0..d.num_blocks() {
                for c in l.owned().collect::<Vec<_>>() {
                    let g = d.global(b, c);
                    let mut s = 6.0 * f.get(b, c, 0);
                    for q in 1..7 {
                        let o = l.offset(crate::grid::dirs::D3Q7_C[q]);
                        s -= f.get(b, (c as isize + o) as usize, 0);
                    }
                    out.insert(g, s);
                }
            }
            out
        };
        let (a, b) = (apply(&single), apply(&split));
        assert_eq!(a.len(), b.len());
        for (k, v) in a {
            assert_eq!(v.to_bits(), b[&k].to_bits(), "cell {k:?}");
        }
        let _ = ex;
    }
}
