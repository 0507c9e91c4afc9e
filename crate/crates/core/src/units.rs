//! Lattice unit system: scale factors between SI values and lattice values, and
//! the check that turns a parsed configuration into lattice parameters.
//!
//! Base scales are dx, dt, rho0 and a potential scale of 1 V. A lattice value is
//! the physical value multiplied by the kind's scale factor.

use serde::Serialize;

use crate::analytic::{self, ChargeModel};
use crate::app::config::{PotentialBcConfig, SimulationConfig};
use crate::electrokin::ElectrolyteParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeScales {
    pub dx: f64,
    pub dt: f64,
    pub rho0: f64,
    pub volt: f64,
}

impl LatticeScales {
    pub fn new(dx: f64, dt: f64, rho0: f64) -> Result<Self> {
        for (name, v) in [("dx", dx), ("dt", dt), ("rho0", rho0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameters(vec![format!("{name} must be positive, got {v}")]));
            }
        }
        Ok(Self { dx, dt, rho0, volt: 1.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantityKind {
    Length,
    Time,
    MassDensity,
    Potential,
    Viscosity,
    Velocity,
    Mass,
    Force,
    Current,
    Charge,
    Permittivity,
    ElectricField,
    Energy,
    NumberDensity,
    ChargeDensity,
}

impl QuantityKind {
    pub const ALL: [QuantityKind; 15] = [
        Self::Length,
        Self::Time,
        Self::MassDensity,
        Self::Potential,
        Self::Viscosity,
        Self::Velocity,
        Self::Mass,
        Self::Force,
        Self::Current,
        Self::Charge,
        Self::Permittivity,
        Self::ElectricField,
        Self::Energy,
        Self::NumberDensity,
        Self::ChargeDensity,
    ];

    /// Exponents of (dx, dt, rho0, volt) in the scale factor.
    pub fn exponents(self) -> [i32; 4] {
        use QuantityKind::*;
        match self {
            Length => [-1, 0, 0, 0],
            Time => [0, -1, 0, 0],
            MassDensity => [0, 0, -1, 0],
            Potential => [0, 0, 0, -1],
            Viscosity => [-2, 1, 0, 0],
            Velocity => [-1, 1, 0, 0],
            Mass => [-3, 0, -1, 0],
            Force => [-4, 2, -1, 0],
            Current => [-5, 3, -1, 1],
            Charge => [-5, 2, -1, 1],
            // C/(V·m) = A·s/(V·m)
            Permittivity => [-4, 2, -1, 2],
            ElectricField => [1, 0, 0, -1],
            Energy => [-5, 2, -1, 0],
            NumberDensity => [3, 0, 0, 0],
            ChargeDensity => [-2, 2, -1, 1],
        }
    }

    pub fn scale_factor(self, s: &LatticeScales) -> f64 {
        let [a, b, c, d] = self.exponents();
        s.dx.powi(a) * s.dt.powi(b) * s.rho0.powi(c) * s.volt.powi(d)
    }
}

pub fn to_lattice(kind: QuantityKind, value: f64, scales: &LatticeScales) -> f64 {
    value * kind.scale_factor(scales)
}

pub fn from_lattice(kind: QuantityKind, value: f64, scales: &LatticeScales) -> f64 {
    value / kind.scale_factor(scales)
}

pub fn to_lattice_vec(kind: QuantityKind, v: [f64; 3], scales: &LatticeScales) -> [f64; 3] {
    let f = kind.scale_factor(scales);
    [v[0] * f, v[1] * f, v[2] * f]
}

pub fn from_lattice_vec(kind: QuantityKind, v: [f64; 3], scales: &LatticeScales) -> [f64; 3] {
    let f = kind.scale_factor(scales);
    [v[0] / f, v[1] / f, v[2] / f]
}

/// Time step that makes the lattice viscosity (τ − 1/2)/3 reproduce `nu`.
pub fn derive_time_step(nu: f64, dx: f64, tau: f64) -> Result<f64> {
    if tau <= 0.5 {
        return Err(Error::InvalidParameters(vec![format!(
            "tau = {tau} gives a non-positive viscosity (tau must exceed 0.5)"
        )]));
    }
    if !(nu > 0.0 && dx > 0.0) {
        return Err(Error::InvalidParameters(vec![format!("nu ({nu}) and dx ({dx}) must be positive")]));
    }
    Ok((tau - 0.5) / 3.0 * dx * dx / nu)
}

pub fn lattice_viscosity(tau: f64) -> f64 {
    (tau - 0.5) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceProps {
    pub zeta: f64,
    pub sigma: f64,
    /// Total charge in coulomb.
    pub charge: f64,
    pub charge_lattice: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleTypeParams {
    pub uid: u32,
    pub radius: f64,
    pub radius_lattice: f64,
    pub density_lattice: f64,
    pub surface: Option<SurfaceProps>,
    pub external_force_lattice: [f64; 3],
    pub fixed: bool,
}

/// Parameter set in lattice units plus the SI values needed for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct CheckedParams {
    pub scales: LatticeScales,
    pub tau: f64,
    pub nu_lattice: f64,
    /// Dynamic viscosity (Pa·s).
    pub mu: f64,
    pub electrolyte: Option<ElectrolyteParams>,
    pub kappa_lattice: f64,
    pub eps_lattice: f64,
    pub debye_length_lattice: Option<f64>,
    pub e_ext_lattice: [f64; 3],
    pub particle_types: Vec<ParticleTypeParams>,
    pub warnings: Vec<String>,
}

impl CheckedParams {
    pub fn particle_type(&self, uid: u32) -> Option<&ParticleTypeParams> {
        self.particle_types.iter().find(|t| t.uid == uid)
    }
}

const DH_ZETA_LIMIT: f64 = 25.7e-3;

/// Checks a configuration for completeness and physical validity and derives
/// the lattice parameter set. All problems are collected before returning.
pub fn validate_parameter_set(cfg: &SimulationConfig) -> Result<CheckedParams> {
    let mut errs = Vec::new();
    let mut warnings = Vec::new();

    let d = &cfg.domain;
    for a in 0..3 {
        if d.cells[a] == 0 || d.blocks[a] == 0 {
            errs.push(format!("domain axis {a}: cells and blocks must be positive"));
        } else if d.cells[a] % d.blocks[a] != 0 {
            errs.push(format!(
                "domain axis {a}: {} cells not divisible by {} blocks",
                d.cells[a], d.blocks[a]
            ));
        }
    }
    let f = &cfg.fluid;
    if !(d.dx_m > 0.0) {
        errs.push(format!("domain.dx_m must be positive, got {}", d.dx_m));
    }
    if !(f.kinematic_viscosity_m2_per_s > 0.0) {
        errs.push("fluid.kinematic_viscosity_m2_per_s must be positive".into());
    }
    if !(f.density_kg_per_m3 > 0.0) {
        errs.push("fluid.density_kg_per_m3 must be positive".into());
    }

    let tau = match (f.tau, f.time_step_s) {
        (None, None) => {
            errs.push("fluid: one of tau or time_step_s is required".into());
            None
        }
        (Some(tau), dt) => {
            if tau <= 0.5 {
                errs.push(format!("fluid.tau = {tau}: viscosity non-positive (tau must exceed 0.5)"));
                None
            } else {
                if let (Some(dt), Ok(dt_tau)) =
                    (dt, derive_time_step(f.kinematic_viscosity_m2_per_s, d.dx_m, tau))
                {
                    if ((dt - dt_tau) / dt_tau).abs() > 1e-10 {
                        errs.push(format!(
                            "fluid: time_step_s = {dt:e} inconsistent with tau = {tau} (implies {dt_tau:e})"
                        ));
                    }
                }
                Some(tau)
            }
        }
        (None, Some(dt)) => {
            let tau = 0.5 + 3.0 * f.kinematic_viscosity_m2_per_s * dt / (d.dx_m * d.dx_m);
            if !(dt > 0.0) {
                errs.push("fluid.time_step_s must be positive".into());
                None
            } else {
                Some(tau)
            }
        }
    };
    if let Some(tau) = tau {
        if tau > 10.0 {
            warnings.push(format!("tau = {tau} outside the recommended range ]0.5, 10]"));
        }
    }

    let s = &cfg.solver;
    if !(s.omega > 0.0 && s.omega < 2.0) {
        errs.push(format!("solver.omega = {} outside ]0, 2[", s.omega));
    }
    if !(s.residual_reduction > 0.0 && s.residual_reduction < 1.0) {
        errs.push(format!("solver.residual_reduction = {} outside ]0, 1[", s.residual_reduction));
    }
    if s.check_interval == 0 || s.max_iterations == 0 {
        errs.push("solver.check_interval and solver.max_iterations must be positive".into());
    }

    let electrolyte = cfg.electrolyte.as_ref().map(|e| {
        if !(e.relative_permittivity > 0.0
            && e.valence > 0.0
            && e.temperature_k > 0.0
            && e.concentration_mol_per_l > 0.0)
        {
            errs.push("electrolyte: permittivity, valence, temperature and concentration must be positive".into());
        }
        ElectrolyteParams::new(
            e.relative_permittivity,
            e.valence,
            e.temperature_k,
            e.concentration_mol_per_l,
        )
    });

    if !errs.is_empty() {
        return Err(Error::InvalidParameters(errs));
    }
    let tau = tau.expect("tau derived when no errors");
    let dt = derive_time_step(f.kinematic_viscosity_m2_per_s, d.dx_m, tau)?;
    let scales = LatticeScales::new(d.dx_m, dt, f.density_kg_per_m3)?;
    let mu = f.kinematic_viscosity_m2_per_s * f.density_kg_per_m3;

    let (kappa_lattice, eps_lattice, debye_length_lattice) = match &electrolyte {
        Some(el) => {
            let lambda_l = el.debye_length / d.dx_m;
            if lambda_l < 12.0 {
                errs.push(format!(
                    "Debye length resolved by {lambda_l:.2} cells; at least 12 are required"
                ));
            }
            (
                el.kappa * d.dx_m,
                to_lattice(QuantityKind::Permittivity, el.eps_e, &scales),
                Some(lambda_l),
            )
        }
        None => (0.0, 0.0, None),
    };

    let e_ext = cfg.field.applied_v_per_m;
    if e_ext.iter().any(|v| !v.is_finite()) {
        errs.push("field.applied_v_per_m must be finite".into());
    }
    let e_ext_lattice = to_lattice_vec(QuantityKind::ElectricField, e_ext, &scales);
    let e_mag = e_ext.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut particle_types = Vec::new();
    let mut max_speed = 0.0f64;
    for t in &cfg.particle_types {
        if particle_types.iter().any(|p: &ParticleTypeParams| p.uid == t.uid) {
            errs.push(format!("particle type uid {} declared twice", t.uid));
            continue;
        }
        if !(t.radius_m > 0.0 && t.density_kg_per_m3 > 0.0) {
            errs.push(format!("particle type {}: radius and density must be positive", t.uid));
            continue;
        }
        let radius_lattice = t.radius_m / d.dx_m;
        if radius_lattice < 3.0 {
            errs.push(format!(
                "particle type {}: radius of {radius_lattice:.2} cells is below the floor of 3",
                t.uid
            ));
        }
        let surface = match (t.zeta_v, t.surface_charge_c_per_m2) {
            (Some(_), Some(_)) => {
                errs.push(format!("particle type {}: give either zeta_v or surface_charge_c_per_m2", t.uid));
                None
            }
            (None, None) => None,
            (zeta, sigma) => match &electrolyte {
                None => {
                    errs.push(format!("particle type {}: surface properties need an electrolyte", t.uid));
                    None
                }
                Some(el) => {
                    let props = surface_props(el, t.radius_m, zeta, sigma, t.charge_model, &scales);
                    if props.zeta.abs() > DH_ZETA_LIMIT / el.valence {
                        warnings.push(format!(
                            "particle type {}: |zeta| = {:.1} mV exceeds {:.1} mV/z; Debye-Hückel approximation questionable",
                            t.uid,
                            props.zeta.abs() * 1e3,
                            DH_ZETA_LIMIT * 1e3
                        ));
                    }
                    let u = analytic::henry_velocity(
                        props.zeta,
                        el.kappa,
                        t.radius_m,
                        el.eps_e,
                        mu,
                        e_mag,
                    )
                    .abs()
                    .max(analytic::stokes_terminal_velocity(props.charge * e_mag, mu, t.radius_m).abs());
                    max_speed = max_speed.max(u);
                    Some(props)
                }
            },
        };
        let ext = t.external_force_n;
        let ext_mag = ext.iter().map(|v| v * v).sum::<f64>().sqrt();
        max_speed = max_speed.max(analytic::stokes_terminal_velocity(ext_mag, mu, t.radius_m));
        particle_types.push(ParticleTypeParams {
            uid: t.uid,
            radius: t.radius_m,
            radius_lattice,
            density_lattice: to_lattice(QuantityKind::MassDensity, t.density_kg_per_m3, &scales),
            surface,
            external_force_lattice: to_lattice_vec(QuantityKind::Force, ext, &scales),
            fixed: t.fixed,
        });
    }

    let extent = [
        d.cells[0] as f64 * d.dx_m,
        d.cells[1] as f64 * d.dx_m,
        d.cells[2] as f64 * d.dx_m,
    ];
    for (i, p) in cfg.particles.iter().enumerate() {
        if !particle_types.iter().any(|t| t.uid == p.uid) {
            errs.push(format!("particle {i}: uid {} not declared", p.uid));
        }
        if (0..3).any(|a| !(p.position_m[a] >= 0.0 && p.position_m[a] <= extent[a])) {
            errs.push(format!("particle {i}: position {:?} outside the domain", p.position_m));
        }
    }

    let b = &cfg.boundaries.potential;
    for (axis, bc) in [("x", &b.x), ("y", &b.y), ("z", &b.z)] {
        if matches!(bc, PotentialBcConfig::AnalyticSphere) {
            let charged = cfg.particles.first().and_then(|p| {
                particle_types.iter().find(|t| t.uid == p.uid).and_then(|t| t.surface)
            });
            if charged.is_none() || electrolyte.is_none() {
                errs.push(format!(
                    "potential boundary {axis}: analytic_sphere needs a charged first particle and an electrolyte"
                ));
            }
        }
    }

    let mach = to_lattice(QuantityKind::Velocity, max_speed, &scales) * 3f64.sqrt();
    if mach > 0.3 {
        errs.push(format!("estimated lattice Mach number {mach:.3} exceeds 0.3"));
    } else if mach > 0.1 {
        warnings.push(format!("estimated lattice Mach number {mach:.3} exceeds 0.1"));
    }

    if !errs.is_empty() {
        return Err(Error::InvalidParameters(errs));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(CheckedParams {
        scales,
        tau,
        nu_lattice: lattice_viscosity(tau),
        mu,
        electrolyte,
        kappa_lattice,
        eps_lattice,
        debye_length_lattice,
        e_ext_lattice,
        particle_types,
        warnings,
    })
}

fn surface_props(
    el: &ElectrolyteParams,
    radius: f64,
    zeta: Option<f64>,
    sigma: Option<f64>,
    model: ChargeModel,
    scales: &LatticeScales,
) -> SurfaceProps {
    let sc = |z| analytic::zeta_to_surface_charge(z, el.kappa, radius, el.eps_e, el.valence, el.temperature, model);
    let (zeta, sc) = match (zeta, sigma) {
        (Some(z), _) => (z, sc(z)),
        (None, Some(sigma)) => {
            let z = invert_surface_charge(sigma, |z| sc(z).sigma);
            (z, sc(z))
        }
        (None, None) => unreachable!("caller checks for surface properties"),
    };
    SurfaceProps {
        zeta,
        sigma: sc.sigma,
        charge: sc.charge,
        charge_lattice: to_lattice(QuantityKind::Charge, sc.charge, scales),
    }
}

/// ζ from σ_s by bisection on the monotone ζ–σ relation.
pub fn invert_surface_charge(sigma: f64, relation: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if relation(mid) < sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
