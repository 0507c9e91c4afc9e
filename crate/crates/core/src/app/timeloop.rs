//! The coupled time loop: potential boundary mapping, solver call, electric
//! forces, obstacle mapping, fused LBM sweep, hydrodynamic forces, rigid-body
//! update.

use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::analytic::{diagnostics, dh_sphere_potential};
use crate::electrokin::{
    apply_coulomb_forces, charge_density, edl_field, electric_body_force, set_pot_bc_charged_particles, SolverCall,
    SolverCallPolicy,
};
use crate::grid::{flags, global_sum_with, BlockDomain, CellField, Executor, Pattern};
use crate::lbm::{static_boundary_flags, stream_collide_trt_forced, FluidState, TrtParams};
use crate::momex::{hydrodynamic_force_torque, reconstruct_pdfs, BodyWalls, ObstacleMap};
use crate::potential::{FaceBc, PotentialSystem, SorConfig};
use crate::rigid::{integrate, resolve_contacts, wrap_periodic, RigidBody, Walls};
use crate::units::{from_lattice, from_lattice_vec, to_lattice_vec, validate_parameter_set, CheckedParams, QuantityKind};
use crate::{Error, Result};

use super::config::{PotentialBcConfig, SimulationConfig};
use super::output::OutputWriter;

/// Accumulated wall time per sweep (seconds).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SweepTimes {
    pub pot_bc_map: f64,
    pub sor: f64,
    pub edl_field: f64,
    pub lbm_force: f64,
    pub mo_map: f64,
    pub lbm: f64,
    pub hydr_force: f64,
    pub rigid: f64,
    pub output: f64,
}

impl SweepTimes {
    pub fn sum(&self) -> f64 {
        self.pot_bc_map
            + self.sor
            + self.edl_field
            + self.lbm_force
            + self.mo_map
            + self.lbm
            + self.hydr_force
            + self.rigid
            + self.output
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveRecord {
    pub step: u64,
    pub iterations: usize,
    /// L2 norm over all cells.
    pub initial_residual: f64,
    pub final_residual: f64,
    /// L2 norm divided by the square root of the number of unknowns.
    pub initial_rms: f64,
}

/// One trajectory sample of one body, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub step: u64,
    pub time_s: f64,
    pub body: usize,
    pub position_m: [f64; 3],
    pub velocity_m_per_s: [f64; 3],
    pub force_n: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub steps: u64,
    pub threads: usize,
    pub cells: usize,
    pub fluid_cells: usize,
    pub solid_fraction: f64,
    pub wall_time_s: f64,
    pub sweeps: SweepTimes,
    pub mflups_lbm: f64,
    pub mflups_sor: f64,
    pub sor_calls: usize,
    pub sor_iterations: Vec<usize>,
    pub mean_sor_iterations: f64,
    pub mean_steps_between_solves: Option<f64>,
    pub first_solve: Option<SolveRecord>,
    /// Mean velocity of the first body along the drive direction over the
    /// second half of the samples (lattice and SI units).
    pub terminal_velocity_lattice: Option<f64>,
    pub terminal_velocity_m_per_s: Option<f64>,
    /// (max − min)/mean of the same samples.
    pub velocity_fluctuation: Option<f64>,
    pub reynolds: f64,
    pub mach_lattice: f64,
    pub contacts: usize,
    pub trajectory_digest: String,
    pub warnings: Vec<String>,
}

/// Electric part of the state.
pub struct Electrostatics {
    pub sys: PotentialSystem,
    pub rho_e: CellField<f64>,
    pub e_edl: CellField<f64>,
    pub policy: SolverCallPolicy,
    pub sor: SorConfig,
}

pub struct Simulation {
    pub config: SimulationConfig,
    pub params: CheckedParams,
    pub domain: BlockDomain,
    pub exec: Executor,
    pub trt: TrtParams,
    pub state: FluidState,
    pub flags: CellField<u8>,
    pub obstacles: ObstacleMap,
    pub bodies: Vec<RigidBody>,
    pub walls: Walls,
    pub electro: Option<Electrostatics>,
    pub step: u64,
    pub times: SweepTimes,
    pub solves: Vec<SolveRecord>,
    pub samples: Vec<Sample>,
    /// Total force (lattice) on each body during the last step.
    pub last_force: Vec<[f64; 3]>,
    drive: [f64; 3],
    digest: DefaultHasher,
    max_speed: f64,
    contacts: usize,
    fluid_updates: f64,
    sor_updates: f64,
}

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.0).then(|| v.map(|x| x / n))
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        let params = validate_parameter_set(&config)?;
        let s = &params.scales;
        let periodic = config.periodic_flow();
        let domain = BlockDomain::new(config.domain.cells, config.domain.blocks, periodic)?;
        let exec = Executor::new(config.run.threads)?;
        let trt = TrtParams::new(params.tau)?;
        let mut fl = static_boundary_flags(&domain, config.boundaries.flow);

        let mut bodies = Vec::new();
        for p in &config.particles {
            let t = params.particle_type(p.uid).expect("validated uid");
            let pos = to_lattice_vec(QuantityKind::Length, p.position_m, s);
            let mut b = RigidBody::sphere(p.uid, pos, t.radius_lattice, t.density_lattice);
            b.kin.velocity = to_lattice_vec(QuantityKind::Velocity, p.velocity_m_per_s, s);
            b.prev = b.kin;
            b.external_force = t.external_force_lattice;
            b.fixed = t.fixed;
            if let Some(sp) = t.surface {
                b.charge = sp.charge_lattice;
                b.zeta = Some(sp.zeta);
            }
            bodies.push(b);
        }
        let walls = Walls {
            extent: config.domain.cells.map(|c| c as f64),
            periodic,
        };
        let mut obstacles = ObstacleMap::new(&domain, periodic);
        obstacles.map_bodies(&domain, &bodies, &mut fl)?;

        let electro = match &params.electrolyte {
            None => None,
            Some(_) => {
                let faces = potential_faces(&config, &params, &bodies)?;
                let sys = PotentialSystem::new(&domain, params.kappa_lattice, &faces)?;
                let sv = &config.solver;
                let sor = SorConfig {
                    omega: sv.omega,
                    residual_reduction: sv.residual_reduction,
                    check_interval: sv.check_interval,
                    max_iterations: sv.max_iterations,
                    fixed_iterations: sv.fixed_iterations,
                };
                sor.validate()?;
                Some(Electrostatics {
                    sys,
                    rho_e: CellField::new(&domain, 1, 0.0),
                    e_edl: CellField::new(&domain, 3, 0.0),
                    policy: SolverCallPolicy::new(sv.force_solve_interval),
                    sor,
                })
            }
        };

        // a charged body moves along qE, which is also where U* is measured
        let sign = bodies.first().map_or(1.0, |b| if b.charge < 0.0 { -1.0 } else { 1.0 });
        let drive = unit(params.e_ext_lattice.map(|e| sign * e))
            .or_else(|| unit(bodies.first().map_or([0.0; 3], |b| b.external_force)))
            .unwrap_or([0.0, 1.0, 0.0]);
        let n = bodies.len();
        Ok(Self {
            state: FluidState::new(&domain),
            config,
            params,
            domain,
            exec,
            trt,
            flags: fl,
            obstacles,
            bodies,
            walls,
            electro,
            step: 0,
            times: SweepTimes::default(),
            solves: Vec::new(),
            samples: Vec::new(),
            last_force: vec![[0.0; 3]; n],
            drive,
            digest: DefaultHasher::new(),
            max_speed: 0.0,
            contacts: 0,
            fluid_updates: 0.0,
            sor_updates: 0.0,
        })
    }

    pub fn fluid_cells(&self) -> usize {
        global_sum_with(&self.exec, &self.domain, |b, c| {
            if self.flags.get(b, c, 0) & flags::FLUID != 0 {
                1.0
            } else {
                0.0
            }
        }) as usize
    }

    pub fn solid_fraction(&self) -> f64 {
        self.obstacles.covered_count(&self.domain) as f64 / self.domain.total_cells() as f64
    }

    /// Maps the charged bodies onto the potential grid and solves if the
    /// call policy asks for it; refreshes ρ_e and E_EDL after a solve.
    pub fn update_potential(&mut self) -> Result<Option<SolveRecord>> {
        let Some(el) = self.electro.as_mut() else {
            return Ok(None);
        };
        let t = Instant::now();
        let delta = set_pot_bc_charged_particles(&self.domain, &mut el.sys, &self.bodies);
        self.times.pot_bc_map += t.elapsed().as_secs_f64();
        if el.policy.decide(delta, self.step) == SolverCall::Reuse {
            return Ok(None);
        }
        let t = Instant::now();
        let stats = el.sys.solve(&self.exec, &self.domain, &el.sor)?;
        self.times.sor += t.elapsed().as_secs_f64();
        let t = Instant::now();
        el.sys.exchange(&self.domain, Pattern::FacesEdges);
        edl_field(&self.exec, &self.domain, &el.sys, &mut el.e_edl);
        charge_density(
            &self.exec,
            &self.domain,
            &el.sys,
            &self.flags,
            self.params.kappa_lattice,
            self.params.eps_lattice,
            &mut el.rho_e,
        );
        self.times.edl_field += t.elapsed().as_secs_f64();
        let fluid = self.fluid_cells();
        self.sor_updates += fluid as f64;
        let rec = SolveRecord {
            step: self.step,
            iterations: stats.iterations,
            initial_residual: stats.initial_residual,
            final_residual: stats.final_residual,
            initial_rms: stats.initial_rms(),
        };
        self.solves.push(rec);
        Ok(Some(rec))
    }

    fn apply_forces(&mut self) {
        let t = Instant::now();
        let e_ext = self.params.e_ext_lattice;
        match &self.electro {
            Some(el) => {
                electric_body_force(&self.exec, &self.domain, &el.rho_e, &el.e_edl, e_ext, &mut self.state.force);
                apply_coulomb_forces(&mut self.bodies, e_ext);
            }
            None => self.state.force.fill(0.0),
        }
        for b in self.bodies.iter_mut().filter(|b| !b.fixed) {
            b.accumulate(b.external_force, [0.0; 3]);
        }
        if self.config.run.momentum_neutral {
            self.neutralize();
        }
        self.times.lbm_force += t.elapsed().as_secs_f64();
    }

    /// Subtracts the net external force on fluid and free bodies uniformly
    /// from the fluid cells.
    fn neutralize(&mut self) {
        let len = self.state.force.plane();
        let fl = &self.flags;
        let force = &self.state.force;
        let fluid = |b: usize, c: usize| fl.get(b, c, 0) & flags::FLUID != 0;
        let mut total = [0, 1, 2].map(|a| {
            global_sum_with(&self.exec, &self.domain, |b, c| if fluid(b, c) { force.block(b)[a * len + c] } else { 0.0 })
        });
        for b in self.bodies.iter().filter(|b| !b.fixed) {
            for a in 0..3 {
                total[a] += b.force[a];
            }
        }
        let n = self.fluid_cells() as f64;
        let shift = total.map(|v| v / n);
        let layout = *self.domain.layout();
        for b in 0..self.domain.num_blocks() {
            let fg = self.flags.block(b).to_vec();
            let blk = self.state.force.block_mut(b);
            for c in layout.owned() {
                if fg[c] & flags::FLUID != 0 {
                    for a in 0..3 {
                        blk[a * len + c] -= shift[a];
                    }
                }
            }
        }
    }

    /// One full time step.
    pub fn advance(&mut self) -> Result<()> {
        let step = self.step;
        // the fluid mapping goes first so that ρ_e of a solve on this step
        // already covers cells the bodies have just left
        let t = Instant::now();
        self.obstacles.map_bodies(&self.domain, &self.bodies, &mut self.flags)?;
        self.times.mo_map += t.elapsed().as_secs_f64();
        self.update_potential()?;
        self.apply_forces();

        let t = Instant::now();
        reconstruct_pdfs(&self.domain, &mut self.state, &self.obstacles, &self.bodies, &self.walls)?;
        self.times.mo_map += t.elapsed().as_secs_f64();

        let t = Instant::now();
        self.state.exchange(&self.domain, self.walls.periodic);
        let bw = BodyWalls {
            bodies: &self.bodies,
            walls: self.walls,
        };
        stream_collide_trt_forced(
            &self.exec,
            &self.domain,
            &mut self.state,
            &self.flags,
            Some((&self.obstacles.body, &bw)),
            &self.trt,
        )
        .map_err(|e| match e {
            Error::NonFinite { field, block, cell, .. } => Error::NonFinite { field, block, cell, step },
            other => other,
        })?;
        let lbm_time = t.elapsed().as_secs_f64();
        self.times.lbm += lbm_time;
        self.fluid_updates += self.fluid_cells() as f64;

        let t = Instant::now();
        let ft = hydrodynamic_force_torque(&self.exec, &self.domain, &self.state, &self.flags, &self.obstacles, &bw);
        for (b, f) in self.bodies.iter_mut().zip(&ft) {
            b.accumulate(f.force, f.torque);
        }
        self.state.swap();
        self.times.hydr_force += t.elapsed().as_secs_f64();

        let t = Instant::now();
        for (lf, b) in self.last_force.iter_mut().zip(&self.bodies) {
            *lf = b.force;
        }
        integrate(&mut self.bodies, 1.0);
        self.contacts += resolve_contacts(&mut self.bodies, &self.walls);
        wrap_periodic(&mut self.bodies, &self.walls);
        for b in &self.bodies {
            for v in b.kin.position.iter().chain(&b.kin.velocity).chain(&b.kin.angular_velocity) {
                self.digest.write_u64(v.to_bits());
            }
        }
        self.times.rigid += t.elapsed().as_secs_f64();
        self.step += 1;
        Ok(())
    }

    /// Records one trajectory sample per body and updates the peak speed.
    pub fn sample(&mut self) {
        let s = &self.params.scales;
        let time = self.step as f64 * s.dt;
        for (i, b) in self.bodies.iter().enumerate() {
            self.samples.push(Sample {
                step: self.step,
                time_s: time,
                body: i,
                position_m: from_lattice_vec(QuantityKind::Length, b.kin.position, s),
                velocity_m_per_s: from_lattice_vec(QuantityKind::Velocity, b.kin.velocity, s),
                force_n: from_lattice_vec(QuantityKind::Force, self.last_force[i], s),
            });
        }
        self.max_speed = self.max_speed.max(self.max_fluid_speed());
    }

    /// Largest fluid speed |u| in lattice units.
    pub fn max_fluid_speed(&self) -> f64 {
        let layout = *self.domain.layout();
        self.exec
            .map_blocks(self.domain.num_blocks(), |b| {
                layout
                    .owned()
                    .filter(|&c| self.flags.get(b, c, 0) & flags::FLUID != 0)
                    .map(|c| {
                        let u = self.state.cell_macroscopic(b, c).1;
                        dot(u, u).sqrt()
                    })
                    .fold(0.0, f64::max)
            })
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Runs the configured number of steps (or the single solve of a
    /// potential-only run), writing outputs through `out` when given.
    pub fn run(&mut self, mut out: Option<&mut OutputWriter>) -> Result<RunSummary> {
        let start = Instant::now();
        let run = self.config.run.clone();
        let n = run.sample_interval.max(1);
        if run.potential_only {
            self.update_potential()?;
        } else {
            self.sample();
            if let Some(w) = out.as_deref_mut() {
                let t = Instant::now();
                w.sample_rows(&self.samples)?;
                self.times.output += t.elapsed().as_secs_f64();
            }
            for _ in 0..run.steps {
                self.advance()?;
                let sampled = self.step % n == 0;
                if sampled {
                    let from = self.samples.len();
                    self.sample();
                    if let Some(w) = out.as_deref_mut() {
                        let t = Instant::now();
                        w.sample_rows(&self.samples[from..])?;
                        self.times.output += t.elapsed().as_secs_f64();
                    }
                }
                if let Some(w) = out.as_deref_mut() {
                    if run.vtk_interval > 0 && self.step % run.vtk_interval == 0 {
                        let t = Instant::now();
                        w.vtk(self)?;
                        self.times.output += t.elapsed().as_secs_f64();
                    }
                }
            }
        }
        if let Some(w) = out.as_deref_mut() {
            let t = Instant::now();
            if run.potential_only || run.vtk_interval == 0 || self.step % run.vtk_interval != 0 {
                w.vtk(self)?;
            }
            self.times.output += t.elapsed().as_secs_f64();
        }
        let summary = self.summary(start.elapsed().as_secs_f64());
        if let Some(w) = out {
            w.summary(&summary)?;
        }
        Ok(summary)
    }

    pub fn summary(&self, wall: f64) -> RunSummary {
        let s = &self.params.scales;
        let iters: Vec<usize> = self.solves.iter().map(|r| r.iterations).collect();
        let mean_iters = if iters.is_empty() {
            0.0
        } else {
            iters.iter().sum::<usize>() as f64 / iters.len() as f64
        };
        let gaps = (self.solves.len() > 1).then(|| {
            (self.solves.last().unwrap().step - self.solves[0].step) as f64 / (self.solves.len() - 1) as f64
        });

        // second half of the samples of the first body, initial sample excluded
        let body0: Vec<f64> = self
            .samples
            .iter()
            .filter(|x| x.body == 0 && x.step > 0)
            .map(|x| dot(to_lattice_vec(QuantityKind::Velocity, x.velocity_m_per_s, s), self.drive))
            .collect();
        let tail = &body0[body0.len() / 2..];
        let (u_star, fluct) = if tail.is_empty() {
            (None, None)
        } else {
            let mean = tail.iter().sum::<f64>() / tail.len() as f64;
            let max = tail.iter().cloned().fold(f64::MIN, f64::max);
            let min = tail.iter().cloned().fold(f64::MAX, f64::min);
            (Some(mean), (mean != 0.0).then(|| (max - min) / mean.abs()))
        };
        let reynolds = match (u_star, self.bodies.first()) {
            (Some(u), Some(b)) => {
                let d = from_lattice(QuantityKind::Length, 2.0 * b.radius, s);
                diagnostics(from_lattice(QuantityKind::Velocity, u, s), d, self.config.fluid.kinematic_viscosity_m2_per_s, None, None)
                    .reynolds
            }
            _ => 0.0,
        };
        let mach = self.max_speed.max(u_star.map_or(0.0, f64::abs)) * 3f64.sqrt();
        let mut warnings = self.params.warnings.clone();
        if mach > 0.1 {
            let w = format!("lattice Mach number {mach:.3} exceeds 0.1");
            log::warn!("{w}");
            warnings.push(w);
        }
        RunSummary {
            name: self.config.name.clone(),
            steps: self.step,
            threads: self.exec.threads(),
            cells: self.domain.total_cells(),
            fluid_cells: self.fluid_cells(),
            solid_fraction: self.solid_fraction(),
            wall_time_s: wall,
            sweeps: self.times,
            mflups_lbm: if self.times.lbm > 0.0 { self.fluid_updates / self.times.lbm / 1e6 } else { 0.0 },
            mflups_sor: if self.times.sor > 0.0 { self.sor_updates / self.times.sor / 1e6 } else { 0.0 },
            sor_calls: iters.len(),
            mean_sor_iterations: mean_iters,
            sor_iterations: iters,
            mean_steps_between_solves: gaps,
            first_solve: self.solves.first().copied(),
            terminal_velocity_lattice: u_star,
            terminal_velocity_m_per_s: u_star.map(|u| from_lattice(QuantityKind::Velocity, u, s)),
            velocity_fluctuation: fluct,
            reynolds,
            mach_lattice: mach,
            contacts: self.contacts,
            trajectory_digest: format!("{:016x}", self.digest.finish()),
            warnings,
        }
    }

    /// Electric potential (V) of an owned cell, 0 without electrolyte.
    pub fn potential_at(&self, b: usize, c: usize) -> f64 {
        self.electro.as_ref().map_or(0.0, |e| e.sys.psi.get(b, c, 0))
    }

    /// Total charge of the fluid Σ ρ_e dx³ in lattice units.
    pub fn fluid_charge(&self) -> f64 {
        self.electro
            .as_ref()
            .map_or(0.0, |e| global_sum_with(&self.exec, &self.domain, |b, c| e.rho_e.get(b, c, 0)))
    }

    /// Drive direction used for the terminal-velocity statistics.
    pub fn drive(&self) -> [f64; 3] {
        self.drive
    }
}

fn potential_faces(cfg: &SimulationConfig, params: &CheckedParams, bodies: &[RigidBody]) -> Result<[[FaceBc; 2]; 3]> {
    let s = &params.scales;
    let mut out: [[FaceBc; 2]; 3] = std::array::from_fn(|_| [FaceBc::Periodic, FaceBc::Periodic]);
    for a in 0..3 {
        let f = match cfg.boundaries.potential.axis(a) {
            PotentialBcConfig::Periodic => FaceBc::Periodic,
            PotentialBcConfig::Dirichlet { value_v } => FaceBc::Dirichlet(*value_v),
            // the solver takes the outward derivative per cell
            PotentialBcConfig::Neumann { flux_v_per_m } => FaceBc::Neumann(flux_v_per_m * s.dx),
            PotentialBcConfig::AnalyticSphere => {
                let b = bodies
                    .first()
                    .filter(|b| b.zeta.is_some())
                    .ok_or_else(|| Error::Config("analytic_sphere needs a charged first particle".into()))?;
                let (c, zeta, r, kappa) = (b.kin.position, b.zeta.unwrap_or(0.0), b.radius, params.kappa_lattice);
                FaceBc::DirichletFn(Arc::new(move |x: [f64; 3]| {
                    let d = (0..3).map(|k| (x[k] - c[k]).powi(2)).sum::<f64>().sqrt();
                    dh_sphere_potential(d.max(r), zeta, r, kappa).unwrap_or(zeta)
                }))
            }
        };
        out[a] = [f.clone(), f];
    }
    Ok(out)
}

/// Builds the simulation for `config` and runs it.
pub fn run_timeloop(config: SimulationConfig, out: Option<&mut OutputWriter>) -> Result<RunSummary> {
    let mut sim = Simulation::new(config)?;
    sim.run(out)
}
