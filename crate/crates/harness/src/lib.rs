//! Benchmark registry, run driver, error analysis and result output for the
//! `swe-ofdg` solvers.

pub mod cases;
pub mod config;
pub mod convergence;
pub mod norms;
pub mod oracle;
pub mod runner;
pub mod snapshot;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown case '{0}' (see `list-cases`)")]
    UnknownCase(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible meshes: {0}")]
    MeshMismatch(String),

    #[error("case {case}, k = {degree}, cells {cells:?}: {source}")]
    Solver {
        case: String,
        degree: usize,
        cells: Vec<usize>,
        #[source]
        source: swe_ofdg::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl HarnessError {
    /// Process exit code: 1 for solver failures and I/O, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::UnknownCase(_) | HarnessError::InvalidConfig(_) | HarnessError::Toml(_) => 2,
            HarnessError::MeshMismatch(_) => 2,
            _ => 1,
        }
    }
}

/// Build identifier recorded in run metadata.
pub const BUILD: &str = env!("SWE_OFDG_BUILD");
