use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("segments cover different hours ({left} vs {right})")]
    SpanMismatch { left: usize, right: usize },

    /// Least-squares fit could not be solved.
    #[error("fit failed{}: {reason}", .hour.map(|h| format!(" for hour {h}")).unwrap_or_default())]
    Fit { hour: Option<usize>, reason: String },

    #[error("{}:{line}:{column}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    /// A case entity violates one of its invariants.
    #[error("invalid {entity}: field `{field}` {message}")]
    Validation {
        entity: String,
        field: String,
        message: String,
    },

    #[error("model error: {0}")]
    Model(String),

    /// The backend failed; carries the solver's own message.
    #[error("solver `{backend}` failed: {message}")]
    Solver { backend: String, message: String },

    #[error("schedule check failed for unit {unit}, hour {hour}: {constraint}")]
    Schedule {
        unit: String,
        hour: usize,
        constraint: String,
    },

    #[error("learning error: {0}")]
    Learn(String),

    #[error("io error on {}: {source}", .path.display())]
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

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(
        entity: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Validation {
            entity: entity.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}
