//! Throughput measurement of a scenario over several thread counts.

use serde::Serialize;

use crate::Result;

use super::config::SimulationConfig;
use super::timeloop::{RunSummary, Simulation};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub threads: usize,
    pub steps: u64,
    pub wall_time_s: f64,
    pub mflups_lbm: f64,
    pub mflups_sor: f64,
    /// Share of the summed sweep time spent in the SOR solver and in the
    /// LBM sweep.
    pub sor_share: f64,
    pub lbm_share: f64,
    pub solid_fraction: f64,
    pub trajectory_digest: String,
}

impl BenchRow {
    pub fn from_summary(s: &RunSummary) -> Self {
        let total = s.sweeps.sum().max(f64::MIN_POSITIVE);
        Self {
            threads: s.threads,
            steps: s.steps,
            wall_time_s: s.wall_time_s,
            mflups_lbm: s.mflups_lbm,
            mflups_sor: s.mflups_sor,
            sor_share: s.sweeps.sor / total,
            lbm_share: s.sweeps.lbm / total,
            solid_fraction: s.solid_fraction,
            trajectory_digest: s.trajectory_digest.clone(),
        }
    }
}

/// Runs `cfg` once per thread count, without output. The block layout is
/// taken from the configuration unchanged, so all rows compute the same
/// trajectory.
pub fn bench(cfg: &SimulationConfig, threads: &[usize], steps: Option<u64>) -> Result<Vec<(BenchRow, RunSummary)>> {
    let mut rows = Vec::new();
    for &t in threads {
        let mut c = cfg.clone();
        c.run.threads = t;
        c.run.potential_only = false;
        if let Some(s) = steps {
            c.run.steps = s;
        }
        let mut sim = Simulation::new(c)?;
        let summary = sim.run(None)?;
        log::info!(
            "threads {t}: {:.2} s, LBM {:.2} MFLUPS, SOR {:.2} MFLUPS",
            summary.wall_time_s,
            summary.mflups_lbm,
            summary.mflups_sor
        );
        rows.push((BenchRow::from_summary(&summary), summary));
    }
    Ok(rows)
}

/// Plain-text table of the rows.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("threads  wall_s    MFLUPS_lbm  MFLUPS_sor  sor%   lbm%   digest\n");
    for r in rows {
        out.push_str(&format!(
            "{:<8} {:<9.3} {:<11.3} {:<11.3} {:<6.1} {:<6.1} {}\n",
            r.threads,
            r.wall_time_s,
            r.mflups_lbm,
            r.mflups_sor,
            100.0 * r.sor_share,
            100.0 * r.lbm_share,
            r.trajectory_digest
        ));
    }
    out
}
