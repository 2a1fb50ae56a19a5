use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] hsr_handover::Error),
    #[error("cannot parse {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("malformed CSV field {field} = {value:?}")]
    Parse { field: &'static str, value: String },
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        SimError::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for I/O and 1
    /// for a model failure during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) | SimError::Json { .. } => 2,
            SimError::Model(hsr_handover::Error::InvalidConfig(_)) => 2,
            SimError::Model(_) => 1,
            SimError::Io { .. } | SimError::Csv { .. } | SimError::Parse { .. } => 3,
        }
    }
}
