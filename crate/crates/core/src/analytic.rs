//! Closed-form electrokinetic reference solutions (SI units throughout).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const BOLTZMANN: f64 = 1.380649e-23;
pub const AVOGADRO: f64 = 6.02214076e23;
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// Bulk ion number density (1/m³) for a concentration in mol/L.
pub fn number_density(c_mol_per_l: f64) -> f64 {
    c_mol_per_l * AVOGADRO * 1e3
}

/// Debye-Hückel parameter κ (1/m) of a symmetric z:z electrolyte.
pub fn debye_kappa(c_inf: f64, z: f64, temperature: f64, eps_e: f64) -> f64 {
    let n_inf = number_density(c_inf);
    let e = ELEMENTARY_CHARGE;
    (2.0 * e * e * z * z * n_inf / (eps_e * BOLTZMANN * temperature)).sqrt()
}

/// Potential around a sphere with surface potential ζ in the Debye-Hückel limit.
pub fn dh_sphere_potential(r: f64, zeta: f64, radius: f64, kappa: f64) -> Result<f64> {
    if r < radius {
        return Err(Error::Domain(format!(
            "sphere potential evaluated inside the particle (r = {r:e} < R = {radius:e})"
        )));
    }
    Ok(zeta * radius / r * (-kappa * (r - radius)).exp())
}

/// Radial derivative dψ/dr of [`dh_sphere_potential`].
pub fn dh_sphere_potential_slope(r: f64, zeta: f64, radius: f64, kappa: f64) -> f64 {
    -zeta * radius / r * (-kappa * (r - radius)).exp() * (1.0 / r + kappa)
}

/// Henry's function in Ohshima's closed form; 2/3 for κR → 0, 1 for κR → ∞.
pub fn henry_f(kappa_r: f64) -> f64 {
    let inner = 1.0 + 2.5 / (kappa_r * (1.0 + 2.0 * (-kappa_r).exp()));
    2.0 / 3.0 * (1.0 + 1.0 / (2.0 * inner.powi(3)))
}

/// Electrophoretic velocity component along a field component `e_field`.
pub fn henry_velocity(zeta: f64, kappa: f64, radius: f64, eps_e: f64, mu: f64, e_field: f64) -> f64 {
    eps_e * zeta / mu * henry_f(kappa * radius) * e_field
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeModel {
    DebyeHuckel,
    Ohshima,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCharge {
    /// Surface charge density σ_s (C/m²).
    pub sigma: f64,
    /// Total charge q_s = 4πR²σ_s (C).
    pub charge: f64,
}

/// Surface charge of a sphere carrying the ζ-potential `zeta`.
pub fn zeta_to_surface_charge(
    zeta: f64,
    kappa: f64,
    radius: f64,
    eps_e: f64,
    z: f64,
    temperature: f64,
    model: ChargeModel,
) -> SurfaceCharge {
    let kr = kappa * radius;
    let sigma = match model {
        ChargeModel::DebyeHuckel => zeta * eps_e * (1.0 + kr) / radius,
        ChargeModel::Ohshima => {
            if kr < 0.5 {
                log::warn!("Ohshima surface-charge relation used at kappa*R = {kr:.3} < 0.5");
            }
            let kt = BOLTZMANN * temperature;
            let y = z * ELEMENTARY_CHARGE * zeta / kt;
            if y == 0.0 {
                0.0
            } else {
                let s2 = (0.5 * y).sinh();
                let c4 = (0.25 * y).cosh();
                // ln cosh(x) = ln(1 + 2 sinh²(x/2)) keeps the small-ζ limit accurate
                let ln_cosh = (2.0 * (0.125 * y).sinh().powi(2)).ln_1p();
                let root = (1.0
                    + 2.0 / (kr * c4 * c4)
                    + 8.0 * ln_cosh / (kr * kr * s2 * s2))
                    .sqrt();
                2.0 * eps_e * kappa * kt / (z * ELEMENTARY_CHARGE) * s2 * root
            }
        }
    };
    SurfaceCharge {
        sigma,
        charge: 4.0 * PI * radius * radius * sigma,
    }
}

/// Terminal velocity of a sphere pulled by `force` in Stokes flow.
pub fn stokes_terminal_velocity(force: f64, mu: f64, radius: f64) -> f64 {
    force / (6.0 * PI * mu * radius)
}

/// Relative retardation (U_EP − U_EM)/U_EM.
pub fn retardation(u_ep: f64, u_em: f64) -> Result<f64> {
    if u_em == 0.0 {
        return Err(Error::Domain("retardation undefined for U_EM = 0".into()));
    }
    Ok((u_ep - u_em) / u_em)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub reynolds: f64,
    pub peclet: Option<f64>,
    /// Lattice Mach number, present when a lattice velocity was supplied.
    pub mach_lattice: Option<f64>,
}

pub fn diagnostics(u: f64, length: f64, nu: f64, diffusivity: Option<f64>, u_lattice: Option<f64>) -> Diagnostics {
    Diagnostics {
        reynolds: u.abs() * length / nu,
        peclet: diffusivity.map(|d| u.abs() * length / d),
        mach_lattice: u_lattice.map(|ul| ul.abs() * 3f64.sqrt()),
    }
}
