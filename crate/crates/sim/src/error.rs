use std::path::PathBuf;

use nms_core::Error as ModelError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("oracle guard: {0}")]
    OracleGuard(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SimError {
    /// Process exit code: 2 for configuration and usage problems, 3 for an
    /// unstable operating point, 4 for an oracle guard trip.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config { .. } | SimError::Usage(_) | SimError::Io { .. } | SimError::Csv(_) => 2,
            SimError::OracleGuard(_) => 4,
            SimError::Model(e) => match e {
                ModelError::StaticInstability { .. }
                | ModelError::DynamicInstability { .. }
                | ModelError::NotPositiveDefinite => 3,
                ModelError::InvalidParameter { .. }
                | ModelError::InvalidGrid
                | ModelError::CapExceeded { .. } => 2,
                _ => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
