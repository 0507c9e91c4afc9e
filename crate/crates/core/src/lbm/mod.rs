//! Incompressible D3Q19 lattice Boltzmann method with the two-relaxation-time
//! collision operator and Luo's forcing term.
//!
//! Conventions: the PDF fields hold post-collision values (forcing included).
//! Equilibrium and forcing use the bare momentum density j = Σ f c; the
//! macroscopic velocity is u = j + f_b/2 with j taken before collision,
//! i.e. u = j̃ − f_b/2 from the stored post-collision values.

mod state;
mod stream;

use serde::Serialize;

pub use state::{static_boundary_flags, update_near_flags, FluidState};
pub use stream::{moving_wall_bounce, stream_collide_trt_forced, NoBodies, WallVelocity};

use crate::grid::dirs::{D3Q19_C, D3Q19_W, Q19};
use crate::{Error, Result};

pub const CS2: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowBc {
    Periodic,
    NoSlip,
    FreeSlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrtParams {
    pub tau: f64,
    pub lambda_e: f64,
    pub lambda_o: f64,
}

impl TrtParams {
    /// Even rate from τ; the odd rate is fixed so that bounce-back walls sit
    /// half-way between lattice sites independent of τ.
    pub fn new(tau: f64) -> Result<Self> {
        if tau <= 0.5 {
            return Err(Error::InvalidParameters(vec![format!("tau = {tau} must exceed 0.5")]));
        }
        let it = 1.0 / tau;
        Ok(Self {
            tau,
            lambda_e: -it,
            lambda_o: -8.0 * (2.0 - it) / (8.0 - it),
        })
    }

    pub fn viscosity(&self) -> f64 {
        (self.tau - 0.5) / 3.0
    }
}

#[inline(always)]
fn dot(c: [i32; 3], v: [f64; 3]) -> f64 {
    c[0] as f64 * v[0] + c[1] as f64 * v[1] + c[2] as f64 * v[2]
}

/// Incompressible equilibrium with ρ0 = 1.
pub fn equilibrium(rho: f64, u: [f64; 3]) -> [f64; Q19] {
    let usq = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let mut feq = [0.0; Q19];
    for q in 0..Q19 {
        let cu = dot(D3Q19_C[q], u);
        feq[q] = D3Q19_W[q] * (rho + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq);
    }
    feq
}

/// Density and velocity u = Σ f c + f_b/2 of one cell.
pub fn macroscopic(f: &[f64; Q19], fb: [f64; 3]) -> (f64, [f64; 3]) {
    let (rho, j) = moments(f);
    (rho, [j[0] + 0.5 * fb[0], j[1] + 0.5 * fb[1], j[2] + 0.5 * fb[2]])
}

/// Zeroth and bare first moment.
#[inline(always)]
pub fn moments(f: &[f64; Q19]) -> (f64, [f64; 3]) {
    let mut rho = 0.0;
    let mut j = [0.0; 3];
    for q in 0..Q19 {
        rho += f[q];
        let c = D3Q19_C[q];
        j[0] += f[q] * c[0] as f64;
        j[1] += f[q] * c[1] as f64;
        j[2] += f[q] * c[2] as f64;
    }
    (rho, j)
}

/// Even and odd parts; the odd part is formed as f − f^e so that
/// f^e + f^o restores f exactly whenever f_q and f_q̄ are within a factor
/// three of each other.
pub fn even_odd(f: &[f64; Q19]) -> ([f64; Q19], [f64; Q19]) {
    let mut e = [0.0; Q19];
    let mut o = [0.0; Q19];
    e[0] = f[0];
    for q in (1..Q19).step_by(2) {
        let fe = 0.5 * (f[q] + f[q + 1]);
        e[q] = fe;
        e[q + 1] = fe;
        o[q] = f[q] - fe;
        o[q + 1] = f[q + 1] - fe;
    }
    (e, o)
}

/// TRT relaxation plus Luo forcing of one cell, in place. Returns the density.
#[inline(always)]
pub fn collide(f: &mut [f64; Q19], fb: [f64; 3], trt: &TrtParams) -> f64 {
    let (rho, u) = moments(f);
    let usq = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let uf = u[0] * fb[0] + u[1] * fb[1] + u[2] * fb[2];
    let (le, lo) = (trt.lambda_e, trt.lambda_o);

    let w0 = D3Q19_W[0];
    let feq0 = w0 * (rho - 1.5 * usq);
    f[0] += le * (f[0] - feq0) - 3.0 * w0 * uf;

    for q in (1..Q19).step_by(2) {
        let w = D3Q19_W[q];
        let c = D3Q19_C[q];
        let cu = dot(c, u);
        let cf = dot(c, fb);
        let (a, b) = (f[q], f[q + 1]);
        let fe = 0.5 * (a + b);
        let fo = a - fe;
        let de = le * (fe - w * (rho + 4.5 * cu * cu - 1.5 * usq));
        let dodd = lo * (fo - 3.0 * w * cu);
        let force_e = w * (9.0 * cu * cf - 3.0 * uf);
        let force_o = 3.0 * w * cf;
        f[q] = a + de + dodd + force_e + force_o;
        f[q + 1] = b + de - dodd + force_e - force_o;
    }
    rho
}

/// Luo forcing term F_q for velocity u and force density fb.
pub fn forcing_term(u: [f64; 3], fb: [f64; 3]) -> [f64; Q19] {
    let mut out = [0.0; Q19];
    for q in 0..Q19 {
        let c = D3Q19_C[q];
        let cmu = [c[0] as f64 - u[0], c[1] as f64 - u[1], c[2] as f64 - u[2]];
        let cu = dot(c, u);
        let cf = dot(c, fb);
        out[q] = D3Q19_W[q]
            * (3.0 * (cmu[0] * fb[0] + cmu[1] * fb[1] + cmu[2] * fb[2]) + 9.0 * cu * cf);
    }
    out
}
