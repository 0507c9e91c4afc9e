use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter set:\n  {}", .0.join("\n  "))]
    InvalidParameters(Vec<String>),

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("config: {0}")]
    Config(String),

    #[error("body {uid}: radius {radius} is below the resolution floor of 3 cells")]
    Resolution { uid: u32, radius: f64 },

    #[error("potential solver not converged after {iterations} iterations: residual {residual:e} > target {target:e}")]
    NotConverged {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("non-finite value in {field} at block {block}, cell {cell:?} (step {step})")]
    NonFinite {
        field: &'static str,
        block: usize,
        cell: [usize; 3],
        step: u64,
    },

    #[error("lattice Mach number {0:.3} exceeds 0.3")]
    Mach(f64),

    #[error("cell {cell:?} of block {block} was uncovered without a previous covering body")]
    Reconstruction { block: usize, cell: [usize; 3] },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}
