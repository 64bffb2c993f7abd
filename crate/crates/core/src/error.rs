use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite residual in cell {cell} (variable {variable})")]
    NonFinite { cell: usize, variable: usize },

    #[error("negative mean water height {mean:e} in cell {cell}")]
    NegativeMean { cell: usize, mean: f64 },

    #[error("every cell is dry; no admissible time step")]
    AllDry,

    #[error("solver aborted at t = {time}: {source}")]
    Aborted {
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_time(self, time: f64) -> Self {
        match self {
            e @ Error::Aborted { .. } => e,
            e => Error::Aborted {
                time,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
