use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use elphor::app::bench::{bench, format_table, BenchRow};
use elphor::app::presets::{drag_reference, henry_validation};
use elphor::app::{preset, OutputWriter, RunSummary, Simulation, SimulationConfig, PRESET_NAMES};

#[derive(Parser)]
#[command(name = "elphor", version, about = "Electrophoresis of charged spheres with LBM and a Debye-Hückel solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario described by a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Run a built-in scenario.
    Preset {
        name: String,
        /// Sphere radius in cells (henry_validation, drag_reference).
        #[arg(long)]
        radius: Option<f64>,
        /// Print the scenario as TOML and exit.
        #[arg(long)]
        print: bool,
        #[command(flatten)]
        over: Overrides,
    },
    /// Time a scenario for several thread counts.
    Bench {
        /// Preset name or path to a TOML file.
        #[arg(default_value = "scaling_block")]
        scenario: String,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        threads: Vec<usize>,
        #[arg(long)]
        steps: Option<u64>,
        /// Write the rows as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    Presets,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; nothing is written without one.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    sample_interval: Option<u64>,
    #[arg(long)]
    vtk_interval: Option<u64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut SimulationConfig) {
        if let Some(s) = self.steps {
            cfg.run.steps = s;
        }
        if let Some(t) = self.threads {
            cfg.run.threads = t;
        }
        if let Some(o) = &self.output {
            cfg.run.output_dir = Some(o.display().to_string());
        }
        if let Some(n) = self.sample_interval {
            cfg.run.sample_interval = n;
        }
        if let Some(n) = self.vtk_interval {
            cfg.run.vtk_interval = n;
        }
    }
}

fn load_scenario(s: &str) -> Result<SimulationConfig> {
    if PRESET_NAMES.contains(&s) {
        return Ok(preset(s)?);
    }
    Ok(SimulationConfig::from_file(std::path::Path::new(s)).with_context(|| format!("loading {s}"))?)
}

fn execute(cfg: SimulationConfig) -> Result<RunSummary> {
    let mut sim = Simulation::new(cfg)?;
    for w in &sim.params.warnings {
        log::warn!("{w}");
    }
    let mut writer = match &sim.config.run.output_dir {
        Some(d) => Some(OutputWriter::create(d)?),
        None => None,
    };
    let summary = sim.run(writer.as_mut())?;
    print_summary(&summary);
    Ok(summary)
}

fn print_summary(s: &RunSummary) {
    println!("scenario            {}", s.name);
    println!("steps               {}", s.steps);
    println!("cells / fluid       {} / {}", s.cells, s.fluid_cells);
    println!("solid fraction      {:.4}", s.solid_fraction);
    println!("wall time           {:.3} s", s.wall_time_s);
    println!("MFLUPS LBM / SOR    {:.3} / {:.3}", s.mflups_lbm, s.mflups_sor);
    println!("SOR calls           {} (mean {:.1} iterations)", s.sor_calls, s.mean_sor_iterations);
    if let Some(r) = &s.first_solve {
        println!("initial residual    L2 {:.4e}, RMS {:.4e}", r.initial_residual, r.initial_rms);
    }
    if let Some(u) = s.terminal_velocity_m_per_s {
        println!("terminal velocity   {u:.5e} m/s ({:.5e} lattice)", s.terminal_velocity_lattice.unwrap_or(0.0));
    }
    if let Some(d) = s.velocity_fluctuation {
        println!("fluctuation         {:.3} %", 100.0 * d);
    }
    println!("Re / Ma             {:.3e} / {:.3e}", s.reynolds, s.mach_lattice);
    println!("trajectory digest   {}", s.trajectory_digest);
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, over } => {
            let mut cfg = SimulationConfig::from_file(&config).with_context(|| format!("loading {}", config.display()))?;
            over.apply(&mut cfg);
            execute(cfg)?;
        }
        Cmd::Preset { name, radius, print, over } => {
            let mut cfg = match (name.as_str(), radius) {
                ("henry_validation", Some(r)) => henry_validation(r),
                ("drag_reference", Some(r)) => drag_reference(r),
                (_, Some(_)) => bail!("--radius only applies to henry_validation and drag_reference"),
                _ => preset(&name)?,
            };
            over.apply(&mut cfg);
            if print {
                print!("{}", cfg.to_toml_string());
            } else {
                execute(cfg)?;
            }
        }
        Cmd::Bench { scenario, threads, steps, json } => {
            let cfg = load_scenario(&scenario)?;
            let rows: Vec<BenchRow> = bench(&cfg, &threads, steps)?.into_iter().map(|(r, _)| r).collect();
            print!("{}", format_table(&rows));
            if let Some(p) = json {
                std::fs::write(&p, serde_json::to_string_pretty(&rows)?).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Cmd::Presets => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
        }
    }
    Ok(())
}
