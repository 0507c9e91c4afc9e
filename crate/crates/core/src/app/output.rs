//! Run outputs: legacy VTK snapshots, a trajectory CSV and a JSON summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::io_err;
use crate::grid::flags;
use crate::units::{from_lattice, QuantityKind};
use crate::Result;

use super::timeloop::{RunSummary, Sample, Simulation};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub struct OutputWriter {
    dir: PathBuf,
    csv: csv::Writer<File>,
}

impl OutputWriter {
    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(TRAJECTORY_FILE);
        let file = File::create(&path).map_err(io_err(&path))?;
        let csv = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        let mut w = Self { dir, csv };
        w.csv.write_record([
            "step", "time_s", "body", "x_m", "y_m", "z_m", "vx_m_per_s", "vy_m_per_s", "vz_m_per_s", "fx_n", "fy_n",
            "fz_n",
        ])?;
        Ok(w)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn sample_rows(&mut self, rows: &[Sample]) -> Result<()> {
        for s in rows {
            let mut rec = vec![s.step.to_string(), format!("{:e}", s.time_s), s.body.to_string()];
            for v in s.position_m.iter().chain(&s.velocity_m_per_s).chain(&s.force_n) {
                rec.push(format!("{v:e}"));
            }
            self.csv.write_record(&rec)?;
        }
        self.csv.flush().map_err(io_err(&self.dir.join(TRAJECTORY_FILE)))?;
        Ok(())
    }

    pub fn vtk(&mut self, sim: &Simulation) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}_{:06}.vtk", sim.config.name, sim.step));
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        write_vtk(&mut w, sim).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn summary(&mut self, s: &RunSummary) -> Result<()> {
        let path = self.dir.join(SUMMARY_FILE);
        let text = serde_json::to_string_pretty(s)?;
        fs::write(&path, text).map_err(io_err(&path))
    }
}

/// Writes the potential (V), fluid velocity and speed (m/s) and charge
/// density (C/m³) as point data on the cell centres. Obstacle cells carry
/// zero velocity.
pub fn write_vtk(w: &mut impl Write, sim: &Simulation) -> std::io::Result<()> {
    let d = &sim.domain;
    let [nx, ny, nz] = d.cells();
    let s = &sim.params.scales;
    let dx = s.dx;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{} step {}", sim.config.name, sim.step)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {nx} {ny} {nz}")?;
    writeln!(w, "ORIGIN {:e} {:e} {:e}", dx / 2.0, dx / 2.0, dx / 2.0)?;
    writeln!(w, "SPACING {dx:e} {dx:e} {dx:e}")?;
    writeln!(w, "POINT_DATA {}", nx * ny * nz)?;

    let cells = || {
        (0..nz).flat_map(move |z| {
            (0..ny).flat_map(move |y| (0..nx).map(move |x| d.locate([x as i64, y as i64, z as i64]).expect("inside")))
        })
    };
    let vel = |b: usize, c: usize| {
        if sim.flags.get(b, c, 0) & flags::FLUID != 0 {
            sim.state.cell_macroscopic(b, c).1.map(|v| from_lattice(QuantityKind::Velocity, v, s))
        } else {
            [0.0; 3]
        }
    };

    writeln!(w, "SCALARS potential_V double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for (b, c) in cells() {
        writeln!(w, "{:e}", sim.potential_at(b, c))?;
    }
    writeln!(w, "VECTORS velocity_m_per_s double")?;
    for (b, c) in cells() {
        let u = vel(b, c);
        writeln!(w, "{:e} {:e} {:e}", u[0], u[1], u[2])?;
    }
    writeln!(w, "SCALARS speed_m_per_s double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for (b, c) in cells() {
        let u = vel(b, c);
        writeln!(w, "{:e}", (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt())?;
    }
    if let Some(el) = &sim.electro {
        writeln!(w, "SCALARS charge_density_C_per_m3 double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for (b, c) in cells() {
            writeln!(w, "{:e}", from_lattice(QuantityKind::ChargeDensity, el.rho_e.get(b, c, 0), s))?;
        }
    }
    Ok(())
}
