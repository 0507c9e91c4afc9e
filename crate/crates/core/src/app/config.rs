//! Run configuration. Files are TOML with sections; every dimensional key
//! carries its SI unit as a suffix (`dx_m`, `radius_m`, `applied_v_per_m`, ...).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::ChargeModel;
use crate::error::io_err;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub domain: DomainConfig,
    #[serde(default)]
    pub boundaries: BoundaryConfig,
    pub fluid: FluidConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electrolyte: Option<ElectrolyteConfig>,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, rename = "particle_type")]
    pub particle_types: Vec<ParticleTypeConfig>,
    #[serde(default, rename = "particle")]
    pub particles: Vec<ParticleConfig>,
    pub run: RunConfig,
}

fn default_name() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub cells: [usize; 3],
    #[serde(default = "one_block")]
    pub blocks: [usize; 3],
    pub dx_m: f64,
}

fn one_block() -> [usize; 3] {
    [1, 1, 1]
}

pub use crate::lbm::FlowBc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialBcConfig {
    Periodic,
    Dirichlet {
        #[serde(default)]
        value_v: f64,
    },
    /// Outward normal derivative on both faces of the axis.
    Neumann {
        #[serde(default)]
        flux_v_per_m: f64,
    },
    /// Dirichlet data from the Debye-Hückel sphere solution around the first particle.
    AnalyticSphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBoundaries {
    pub x: PotentialBcConfig,
    pub y: PotentialBcConfig,
    pub z: PotentialBcConfig,
}

impl PotentialBoundaries {
    pub fn axis(&self, a: usize) -> &PotentialBcConfig {
        match a {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }
}

impl Default for PotentialBoundaries {
    fn default() -> Self {
        Self {
            x: PotentialBcConfig::Periodic,
            y: PotentialBcConfig::Periodic,
            z: PotentialBcConfig::Periodic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default = "all_periodic")]
    pub flow: [FlowBc; 3],
    #[serde(default)]
    pub potential: PotentialBoundaries,
}

fn all_periodic() -> [FlowBc; 3] {
    [FlowBc::Periodic; 3]
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            flow: all_periodic(),
            potential: PotentialBoundaries::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidConfig {
    pub kinematic_viscosity_m2_per_s: f64,
    pub density_kg_per_m3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_step_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrolyteConfig {
    pub relative_permittivity: f64,
    pub valence: f64,
    pub temperature_k: f64,
    pub concentration_mol_per_l: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub applied_v_per_m: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_rf")]
    pub residual_reduction: f64,
    #[serde(default = "default_one")]
    pub check_interval: usize,
    #[serde(default = "default_max_iter")]
    pub max_iterations: usize,
    /// Run exactly this many iterations per solve, without residual checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_iterations: Option<usize>,
    /// Steps after which a solve is forced even without a mapping change.
    #[serde(default = "default_force_interval")]
    pub force_solve_interval: u64,
}

fn default_omega() -> f64 {
    1.7
}
fn default_rf() -> f64 {
    1e-6
}
fn default_one() -> usize {
    1
}
fn default_max_iter() -> usize {
    100_000
}
fn default_force_interval() -> u64 {
    100
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            omega: default_omega(),
            residual_reduction: default_rf(),
            check_interval: 1,
            max_iterations: default_max_iter(),
            fixed_iterations: None,
            force_solve_interval: default_force_interval(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleTypeConfig {
    pub uid: u32,
    pub radius_m: f64,
    pub density_kg_per_m3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_charge_c_per_m2: Option<f64>,
    #[serde(default = "default_model")]
    pub charge_model: ChargeModel,
    /// Constant non-electric force on each body of this type.
    #[serde(default)]
    pub external_force_n: [f64; 3],
    #[serde(default)]
    pub fixed: bool,
}

fn default_model() -> ChargeModel {
    ChargeModel::Ohshima
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub uid: u32,
    /// Center position measured from the low domain corner.
    pub position_m: [f64; 3],
    #[serde(default)]
    pub velocity_m_per_s: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub steps: u64,
    #[serde(default = "default_one")]
    pub threads: usize,
    #[serde(default = "default_sample")]
    pub sample_interval: u64,
    /// VTK cadence in steps; 0 writes only the final state.
    #[serde(default)]
    pub vtk_interval: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Removes the net external force from the system by a uniform
    /// counter-force on the fluid (needed with fully periodic flow).
    #[serde(default)]
    pub momentum_neutral: bool,
    /// Solve the potential once and stop; no flow.
    #[serde(default)]
    pub potential_only: bool,
}

fn default_sample() -> u64 {
    20
}

impl SimulationConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn periodic_flow(&self) -> [bool; 3] {
        self.boundaries.flow.map(|b| b == FlowBc::Periodic)
    }

    pub fn periodic_potential(&self) -> [bool; 3] {
        [0, 1, 2].map(|a| matches!(self.boundaries.potential.axis(a), PotentialBcConfig::Periodic))
    }
}
