#![allow(dead_code)]

use elphor::grid::{BlockDomain, Executor};
use elphor::lbm::{static_boundary_flags, stream_collide_trt_forced, FlowBc, FluidState, NoBodies, TrtParams};

pub struct Channel {
    pub domain: BlockDomain,
    pub state: FluidState,
    pub flags: elphor::grid::CellField<u8>,
    pub trt: TrtParams,
    pub exec: Executor,
    pub periodic: [bool; 3],
}

impl Channel {
    pub fn new(cells: [usize; 3], blocks: [usize; 3], bc: [FlowBc; 3], tau: f64, threads: usize) -> Self {
        let periodic = bc.map(|b| b == FlowBc::Periodic);
        let domain = BlockDomain::new(cells, blocks, periodic).unwrap();
        let flags = static_boundary_flags(&domain, bc);
        Self {
            state: FluidState::new(&domain),
            domain,
            flags,
            trt: TrtParams::new(tau).unwrap(),
            exec: Executor::new(threads).unwrap(),
            periodic,
        }
    }

    pub fn set_uniform_force(&mut self, f: [f64; 3]) {
        let len = self.state.force.plane();
        for blk in self.state.force.blocks_mut() {
            for a in 0..3 {
                blk[a * len..(a + 1) * len].fill(f[a]);
            }
        }
    }

    pub fn step(&mut self) {
        self.state.exchange(&self.domain, self.periodic);
        stream_collide_trt_forced::<NoBodies>(&self.exec, &self.domain, &mut self.state, &self.flags, None, &self.trt)
            .unwrap();
        self.state.swap();
    }

    /// Velocity at a global cell (u = j + f/2).
    pub fn velocity(&self, g: [i64; 3]) -> [f64; 3] {
        let (b, c) = self.domain.locate(g).unwrap();
        self.state.cell_macroscopic(b, c).1
    }
}

/// Relative error of the mid-channel velocity of a force-driven channel of
/// width `w` between no-slip walls, against the parabolic profile.
pub fn poiseuille_mid_error(w: usize, tau: f64, steps: usize) -> f64 {
    let mut ch = Channel::new([w, 2, 2], [2, 1, 1], [FlowBc::NoSlip, FlowBc::Periodic, FlowBc::Periodic], tau, 1);
    let nu = (tau - 0.5) / 3.0;
    let fy = 0.01 * 8.0 * nu / (w * w) as f64;
    ch.set_uniform_force([0.0, fy, 0.0]);
    for _ in 0..steps {
        ch.step();
    }
    let mut worst: f64 = 0.0;
    for x in 0..w as i64 {
        let s = x as f64 + 0.5;
        let exact = fy / (2.0 * nu) * s * (w as f64 - s);
        let u = ch.velocity([x, 0, 0])[1];
        if x == w as i64 / 2 || x == w as i64 / 2 - 1 {
            worst = worst.max(((u - exact) / exact).abs());
        }
    }
    worst
}

/// Viscosity fitted from the decay of a transverse shear wave of wavelength `l`.
pub fn shear_wave_viscosity(l: usize, tau: f64) -> f64 {
    let mut ch = Channel::new([l, 2, 2], [1, 1, 1], [FlowBc::Periodic; 3], tau, 1);
    let k = 2.0 * std::f64::consts::PI / l as f64;
    let u0 = 1e-3;
    for x in 0..l as i64 {
        for y in 0..2 {
            for z in 0..2 {
                let (b, c) = ch.domain.locate([x, y, z]).unwrap();
                ch.state.set_equilibrium(b, c, 1.0, [0.0, u0 * (k * x as f64).sin(), 0.0]);
            }
        }
    }
    let amplitude = |ch: &Channel| {
        (0..l as i64).map(|x| ch.velocity([x, 0, 0])[1] * (k * x as f64).sin()).sum::<f64>() * 2.0 / l as f64
    };
    let nu = (tau - 0.5) / 3.0;
    // skip the initial non-equilibrium transient, then fit over ~one decay time
    let t_decay = (1.0 / (nu * k * k)).round() as usize;
    let t1 = (t_decay / 5).max(20);
    let t2 = t1 + t_decay;
    for _ in 0..t1 {
        ch.step();
    }
    let a1 = amplitude(&ch);
    for _ in t1..t2 {
        ch.step();
    }
    let a2 = amplitude(&ch);
    (a1 / a2).ln() / (k * k * (t2 - t1) as f64)
}

use elphor::grid::CellField;
use elphor::potential::{FaceBc, PotentialSystem, SorConfig};
use std::sync::Arc;

/// Max-norm error of the solver for ψ = sin(ax)sin(by)sin(cz) on the unit
/// cube resolved by `n` cells per axis, with Dirichlet data on all faces.
pub fn manufactured_error(n: usize, blocks: [usize; 3], kappa: f64) -> f64 {
    let (a, b, c) = (1.3 * std::f64::consts::PI, 0.9 * std::f64::consts::PI, 1.7 * std::f64::consts::PI);
    let h = 1.0 / n as f64;
    let exact = move |x: [f64; 3]| (a * x[0] * h).sin() * (b * x[1] * h).sin() * (c * x[2] * h).sin();
    let domain = BlockDomain::new([n; 3], blocks, [false; 3]).unwrap();
    let face = || FaceBc::DirichletFn(Arc::new(exact));
    let faces = [[face(), face()], [face(), face()], [face(), face()]];
    let mut sys = PotentialSystem::new(&domain, kappa * h, &faces).unwrap();
    let lam = a * a + b * b + c * c + kappa * kappa;
    let layout = *domain.layout();
    for blk in 0..domain.num_blocks() {
        for cell in layout.owned().collect::<Vec<_>>() {
            let g = domain.global(blk, cell).map(|v| v as f64 + 0.5);
            sys.source.set(blk, cell, 0, lam * exact(g) * h * h);
        }
    }
    let exec = Executor::new(1).unwrap();
    let cfg = SorConfig {
        residual_reduction: 1e-11,
        ..SorConfig::default()
    };
    sys.solve(&exec, &domain, &cfg).unwrap();
    max_error(&domain, &sys.psi, |g| exact(g))
}

pub fn max_error(domain: &BlockDomain, psi: &CellField<f64>, exact: impl Fn([f64; 3]) -> f64) -> f64 {
    let layout = *domain.layout();
    let mut worst: f64 = 0.0;
    for blk in 0..domain.num_blocks() {
        for cell in layout.owned() {
            let g = domain.global(blk, cell).map(|v| v as f64 + 0.5);
            worst = worst.max((psi.get(blk, cell, 0) - exact(g)).abs());
        }
    }
    worst
}
