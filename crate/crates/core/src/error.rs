use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{0}")]
    Data(String),

    #[error("dataset too sparse for protocol: no user has at least {required} interactions")]
    TooSparse { required: usize },

    #[error("training diverged ({model}): non-finite loss with {hyperparams}")]
    Divergence { model: String, hyperparams: String },

    #[error("singular normal equations: {0}")]
    Singular(String),

    #[error("solver did not converge after {iterations} iterations (last delta {last_delta:e})")]
    NotConverged { iterations: usize, last_delta: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse error category, used by the command line front-end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => ErrorClass::Usage,
            Error::Divergence { .. } | Error::Singular(_) | Error::NotConverged { .. } => ErrorClass::Numeric,
            Error::Stage { source, .. } => source.class(),
            Error::Io { .. } | Error::Parse { .. } | Error::Data(_) | Error::TooSparse { .. } | Error::Json(_) => {
                ErrorClass::Data
            }
        }
    }
}
