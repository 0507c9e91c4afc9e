//! Built-in scenarios. Lengths are given in cells and converted with the
//! preset's dx.

use crate::analytic::{zeta_to_surface_charge, ChargeModel};
use crate::electrokin::ElectrolyteParams;
use crate::{Error, Result};

use super::config::*;

pub const PRESET_NAMES: [&str; 5] = ["edl_validation", "microchannel", "henry_validation", "drag_reference", "scaling_block"];

const NU: f64 = 1e-6;
const RHO_F: f64 = 1000.0;
const RHO_P: f64 = 1195.0;
const EPS_R: f64 = 78.54;
const TEMPERATURE: f64 = 293.0;

/// Radius (cells) used by the henry/drag presets when none is given.
pub const HENRY_DEFAULT_RADIUS: f64 = 4.0;
/// Field strength of the henry setup (V/m).
pub const HENRY_FIELD: f64 = 99e6;
const HENRY_DX: f64 = 5e-9;
const HENRY_ZETA: f64 = 0.010;
const HENRY_CONC: f64 = 1.6e-5;

pub fn preset(name: &str) -> Result<SimulationConfig> {
    match name {
        "edl_validation" => Ok(edl_validation()),
        "microchannel" => Ok(microchannel()),
        "henry_validation" => Ok(henry_validation(HENRY_DEFAULT_RADIUS)),
        "drag_reference" => Ok(drag_reference(HENRY_DEFAULT_RADIUS)),
        "scaling_block" => Ok(scaling_block()),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

fn fluid(tau: f64) -> FluidConfig {
    FluidConfig {
        kinematic_viscosity_m2_per_s: NU,
        density_kg_per_m3: RHO_F,
        tau: Some(tau),
        time_step_s: None,
    }
}

fn electrolyte(c: f64) -> ElectrolyteConfig {
    ElectrolyteConfig {
        relative_permittivity: EPS_R,
        valence: 1.0,
        temperature_k: TEMPERATURE,
        concentration_mol_per_l: c,
    }
}

fn sphere_type(uid: u32, radius_m: f64, zeta: Option<f64>) -> ParticleTypeConfig {
    ParticleTypeConfig {
        uid,
        radius_m,
        density_kg_per_m3: RHO_P,
        zeta_v: zeta,
        surface_charge_c_per_m2: None,
        charge_model: ChargeModel::Ohshima,
        external_force_n: [0.0; 3],
        fixed: false,
    }
}

fn at_cells(uid: u32, p: [f64; 3], dx: f64) -> ParticleConfig {
    ParticleConfig {
        uid,
        position_m: p.map(|v| v * dx),
        velocity_m_per_s: [0.0; 3],
    }
}

fn run(steps: u64) -> RunConfig {
    RunConfig {
        steps,
        threads: 1,
        sample_interval: 20,
        vtk_interval: 0,
        output_dir: None,
        momentum_neutral: false,
        potential_only: false,
    }
}

/// Single solve of the double-layer potential around a sphere (R = 12 cells)
/// with the analytic solution imposed on the domain faces.
pub fn edl_validation() -> SimulationConfig {
    let dx = 10e-9;
    let analytic = || PotentialBcConfig::AnalyticSphere;
    SimulationConfig {
        name: "edl_validation".into(),
        domain: DomainConfig {
            cells: [128, 256, 128],
            blocks: [1, 2, 1],
            dx_m: dx,
        },
        boundaries: BoundaryConfig {
            flow: [FlowBc::NoSlip, FlowBc::Periodic, FlowBc::NoSlip],
            potential: PotentialBoundaries {
                x: analytic(),
                y: analytic(),
                z: analytic(),
            },
        },
        fluid: fluid(6.5),
        electrolyte: Some(electrolyte(5e-6)),
        field: FieldConfig::default(),
        solver: SolverConfig {
            residual_reduction: 2e-7,
            ..SolverConfig::default()
        },
        particle_types: vec![sphere_type(1, 12.0 * dx, Some(-0.010))],
        particles: vec![at_cells(1, [64.0, 64.0, 64.0], dx)],
        run: RunConfig {
            potential_only: true,
            ..run(0)
        },
    }
}

/// Sphere (R = 12 cells) driven along a square duct with no-slip walls.
pub fn microchannel() -> SimulationConfig {
    let dx = 10e-9;
    SimulationConfig {
        name: "microchannel".into(),
        domain: DomainConfig {
            cells: [128, 256, 128],
            blocks: [1, 2, 1],
            dx_m: dx,
        },
        boundaries: BoundaryConfig {
            flow: [FlowBc::NoSlip, FlowBc::Periodic, FlowBc::NoSlip],
            potential: PotentialBoundaries {
                x: PotentialBcConfig::Neumann { flux_v_per_m: 0.0 },
                y: PotentialBcConfig::Periodic,
                z: PotentialBcConfig::Neumann { flux_v_per_m: 0.0 },
            },
        },
        fluid: fluid(6.5),
        electrolyte: Some(electrolyte(5e-6)),
        field: FieldConfig {
            applied_v_per_m: [0.0, -4.7e7, 0.0],
        },
        solver: SolverConfig {
            residual_reduction: 2e-7,
            ..SolverConfig::default()
        },
        particle_types: vec![sphere_type(1, 12.0 * dx, Some(-0.010))],
        particles: vec![at_cells(1, [64.0, 64.0, 64.0], dx)],
        run: run(6000),
    }
}

/// Desk-scale velocity validation: a sphere of radius `radius_cells` in a
/// 128×192×128 box with free-slip lateral walls, periodic flow along the
/// field and homogeneous Dirichlet potential on the y faces.
pub fn henry_validation(radius_cells: f64) -> SimulationConfig {
    let dx = HENRY_DX;
    SimulationConfig {
        name: "henry_validation".into(),
        domain: DomainConfig {
            cells: [128, 192, 128],
            blocks: [1, 1, 1],
            dx_m: dx,
        },
        boundaries: BoundaryConfig {
            flow: [FlowBc::FreeSlip, FlowBc::Periodic, FlowBc::FreeSlip],
            potential: PotentialBoundaries {
                x: PotentialBcConfig::Neumann { flux_v_per_m: 0.0 },
                y: PotentialBcConfig::Dirichlet { value_v: 0.0 },
                z: PotentialBcConfig::Neumann { flux_v_per_m: 0.0 },
            },
        },
        fluid: fluid(6.0),
        electrolyte: Some(electrolyte(HENRY_CONC)),
        field: FieldConfig {
            applied_v_per_m: [0.0, HENRY_FIELD, 0.0],
        },
        solver: SolverConfig::default(),
        particle_types: vec![sphere_type(1, radius_cells * dx, Some(HENRY_ZETA))],
        particles: vec![at_cells(1, [64.0, 60.0, 64.0], dx)],
        run: RunConfig {
            momentum_neutral: true,
            ..run(15_000)
        },
    }
}

/// Coulomb force on the henry sphere of the given radius (N).
pub fn henry_coulomb_force(radius_cells: f64) -> f64 {
    let el = ElectrolyteParams::new(EPS_R, 1.0, TEMPERATURE, HENRY_CONC);
    let sc = zeta_to_surface_charge(
        HENRY_ZETA,
        el.kappa,
        radius_cells * HENRY_DX,
        el.eps_e,
        1.0,
        TEMPERATURE,
        ChargeModel::Ohshima,
    );
    sc.charge * HENRY_FIELD
}

/// Henry geometry with an uncharged sphere pulled by the Coulomb force of
/// the charged one; no electrolyte.
pub fn drag_reference(radius_cells: f64) -> SimulationConfig {
    let mut cfg = henry_validation(radius_cells);
    cfg.name = "drag_reference".into();
    cfg.electrolyte = None;
    cfg.field = FieldConfig::default();
    cfg.boundaries.potential = PotentialBoundaries::default();
    cfg.particle_types[0].zeta_v = None;
    cfg.particle_types[0].external_force_n = [0.0, henry_coulomb_force(radius_cells), 0.0];
    cfg
}

/// Performance setup: 144³ cells split into 2×2×2 blocks, 4×4×4 spheres of
/// radius 6 cells spaced 36 cells apart starting at 19 cells, 29 fixed SOR
/// iterations per step, 240 steps.
pub fn scaling_block() -> SimulationConfig {
    let dx = HENRY_DX;
    let mut particles = Vec::new();
    for k in 0..4 {
        for j in 0..4 {
            for i in 0..4 {
                let p = [i, j, k].map(|v| 19.0 + 36.0 * v as f64);
                particles.push(at_cells(1, p, dx));
            }
        }
    }
    SimulationConfig {
        name: "scaling_block".into(),
        domain: DomainConfig {
            cells: [144; 3],
            blocks: [2, 2, 2],
            dx_m: dx,
        },
        boundaries: BoundaryConfig {
            flow: [FlowBc::NoSlip, FlowBc::Periodic, FlowBc::NoSlip],
            potential: PotentialBoundaries {
                x: PotentialBcConfig::Neumann { flux_v_per_m: 0.0 },
                y: PotentialBcConfig::Periodic,
                z: PotentialBcConfig::Neumann { flux_v_per_m: 0.0 },
            },
        },
        fluid: fluid(6.0),
        electrolyte: Some(electrolyte(HENRY_CONC)),
        field: FieldConfig {
            applied_v_per_m: [0.0, 38e6, 0.0],
        },
        solver: SolverConfig {
            fixed_iterations: Some(29),
            ..SolverConfig::default()
        },
        particle_types: vec![sphere_type(1, 6.0 * dx, Some(HENRY_ZETA))],
        particles,
        run: RunConfig {
            sample_interval: 20,
            ..run(240)
        },
    }
}
