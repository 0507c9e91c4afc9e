//! Configuration, scenario presets, the coupled time loop, output writers and
//! the throughput benchmark.

pub mod config;

pub use config::SimulationConfig;
pub mod bench;
pub mod output;
pub mod presets;
pub mod timeloop;

pub use output::OutputWriter;
pub use presets::{preset, PRESET_NAMES};
pub use timeloop::{run_timeloop, RunSummary, Simulation};
