use crate::grid::dirs::{D3Q19_C, D3Q19_INV, D3Q19_W, Q19};
use crate::grid::{flags, BlockDomain, CellField, Executor};
use crate::{Error, Result};

use super::{collide, FluidState, TrtParams};

/// Surface velocity of moving obstacles, queried at boundary-link midpoints.
pub trait WallVelocity: Sync {
    /// Velocity of body `body` at global lattice position `x`.
    fn velocity(&self, body: u32, x: [f64; 3]) -> [f64; 3];
}

/// Placeholder for runs without moving obstacles.
pub struct NoBodies;

impl WallVelocity for NoBodies {
    fn velocity(&self, _body: u32, _x: [f64; 3]) -> [f64; 3] {
        [0.0; 3]
    }
}

/// Population returned into the fluid when `f_out`, travelling along `c_q`,
/// hits a wall moving with `u_s`: f̃_q − 2 (w_q / c_s²) (c_q · u_s).
#[inline(always)]
pub fn moving_wall_bounce(f_out: f64, q: usize, u_s: [f64; 3]) -> f64 {
    let c = D3Q19_C[q];
    let cu = c[0] as f64 * u_s[0] + c[1] as f64 * u_s[1] + c[2] as f64 * u_s[2];
    f_out - 6.0 * D3Q19_W[q] * cu
}

/// Direction obtained by flipping the components of `c_q` selected by `mask`.
fn mirrored(q: usize, mask: [bool; 3]) -> usize {
    let c = D3Q19_C[q];
    let m = [0, 1, 2].map(|a| if mask[a] { -c[a] } else { c[a] });
    D3Q19_C.iter().position(|&v| v == m).expect("mirror stays in the stencil")
}

/// Fused pull-stream and TRT collision from `state.src` into `state.dst` for
/// all owned fluid cells. Links reading a non-fluid cell use half-way
/// bounce-back (no-slip walls and moving obstacles, the latter with the
/// surface velocity correction) or specular reflection (free-slip walls).
/// The source buffer is left intact for the momentum-exchange force; swap
/// the buffers afterwards.
pub fn stream_collide_trt_forced<W: WallVelocity>(
    exec: &Executor,
    domain: &BlockDomain,
    state: &mut FluidState,
    fl: &CellField<u8>,
    obstacles: Option<(&CellField<u32>, &W)>,
    trt: &TrtParams,
) -> Result<()> {
    let layout = *domain.layout();
    let len = layout.len;
    let offs: [isize; Q19] = std::array::from_fn(|q| layout.offset(D3Q19_C[q]));
    let src = &state.src;
    let force = &state.force;
    let cells = domain.cells();
    let periodic = domain.periodic();

    let bad: Vec<Option<usize>> = {
        let mut out: Vec<(usize, &mut Vec<f64>)> = state.dst.blocks_mut().iter_mut().enumerate().collect();
        let results = std::sync::Mutex::new(vec![None; out.len()]);
        exec.for_each_block(&mut out, |_, (b, dst)| {
            let b = *b;
            let s = src.block(b);
            let fb = force.block(b);
            let fg = fl.block(b);
            let origin = domain.block(b).origin;
            let mut first_bad = None;
            let [nx, ny, nz] = layout.n;
            for z in 0..nz as isize {
                for y in 0..ny as isize {
                    let row = layout.idx(0, y, z);
                    for x in 0..nx as isize {
                        let c = row + x as usize;
                        let flag = fg[c];
                        if flag & flags::FLUID == 0 {
                            continue;
                        }
                        let mut f = [0.0; Q19];
                        if flag & flags::NEAR == 0 {
                            for q in 0..Q19 {
                                f[q] = s[q * len + (c as isize - offs[q]) as usize];
                            }
                        } else {
                            let g = [origin[0] + x as i64, origin[1] + y as i64, origin[2] + z as i64];
                            for q in 0..Q19 {
                                let sc = (c as isize - offs[q]) as usize;
                                let sf = fg[sc];
                                f[q] = if sf & flags::FLUID != 0 {
                                    s[q * len + sc]
                                } else {
                                    let p = D3Q19_INV[q];
                                    let own = s[p * len + c];
                                    if sf & flags::OBSTACLE != 0 {
                                        let (map, walls) = obstacles.expect("obstacle cell without obstacle map");
                                        let body = map.get(b, sc, 0);
                                        let cp = D3Q19_C[p];
                                        let xb = [0, 1, 2].map(|a| g[a] as f64 + 0.5 + 0.5 * cp[a] as f64);
                                        moving_wall_bounce(own, p, walls.velocity(body, xb))
                                    } else if sf & flags::FREE_SLIP != 0 {
                                        let cq = D3Q19_C[q];
                                        let mask = [0, 1, 2].map(|a| {
                                            let v = g[a] - cq[a] as i64;
                                            !periodic[a] && (v < 0 || v >= cells[a] as i64)
                                        });
                                        let r = mirrored(q, mask);
                                        let back: [i32; 3] = [0, 1, 2].map(|a| if mask[a] { cq[a] } else { 0 });
                                        let mc = (sc as isize + layout.offset(back)) as usize;
                                        if mask.iter().any(|&m| m) && fg[mc] & flags::FLUID != 0 {
                                            s[r * len + mc]
                                        } else {
                                            own
                                        }
                                    } else {
                                        own
                                    }
                                };
                            }
                        }
                        let rho = collide(&mut f, [fb[c], fb[len + c], fb[2 * len + c]], trt);
                        if !rho.is_finite() && first_bad.is_none() {
                            first_bad = Some(c);
                        }
                        for q in 0..Q19 {
                            dst[q * len + c] = f[q];
                        }
                    }
                }
            }
            results.lock().expect("result lock")[b] = first_bad;
        });
        results.into_inner().expect("result lock")
    };
    for (b, r) in bad.into_iter().enumerate() {
        if let Some(c) = r {
            let p = layout.coords(c);
            return Err(Error::NonFinite {
                field: "pdf",
                block: b,
                cell: [p[0] as usize, p[1] as usize, p[2] as usize],
                step: 0,
            });
        }
    }
    Ok(())
}
