use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the command-line front end reports them:
/// usage problems, data or validation problems, and numerical failures each
/// map to their own exit code (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing: {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("training diverged at update {step}: loss is not finite")]
    Divergence { step: usize },

    #[error("non-finite {what} at row {row}")]
    NonFinite { what: &'static str, row: usize },

    #[error("no convergence after {iterations} iterations (gradient max-norm {grad_norm:.3e}, log-likelihood {log_likelihood:.6})")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        log_likelihood: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 data/validation, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Data(_)
            | Error::Parse { .. }
            | Error::MissingColumns(_)
            | Error::Io { .. }
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::Divergence { .. }
            | Error::NonFinite { .. }
            | Error::NonConvergence { .. }
            | Error::Numerical(_) => 3,
        }
    }
}
