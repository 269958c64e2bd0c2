use std::path::PathBuf;

use thiserror::Error;

/// Broad classification used by callers (the CLI maps these onto exit codes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Usage,
    /// Malformed or unsuitable input data.
    Data,
    /// A numerical procedure could not produce a finite answer.
    Numerical,
}

impl std::fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Numerical => "numerical",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("empty file")]
    EmptyFile,

    #[error("{count} timestamp(s) fall outside the observation window")]
    OutOfWindow { count: usize },

    #[error("invalid metadata: {0}")]
    Metadata(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("catalog has no calendar anchor; cannot resolve month/day windows")]
    MissingCalendarAnchor,

    #[error("empty catalog")]
    EmptyCatalog,

    #[error("query ({x}, {y}, {t}) lies outside region x window")]
    OutsideDomain { x: f64, y: f64, t: f64 },

    #[error("non-positive intensity {value} at event {index}")]
    NonPositiveIntensity { index: usize, value: f64 },

    #[error("branching ratio {0} is not subcritical")]
    Supercritical(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sampler initialization failed after {attempts} attempts: {reason}")]
    Initialization { attempts: usize, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::Supercritical(_) => ErrorKind::Usage,
            Error::NonPositiveIntensity { .. }
            | Error::Initialization { .. }
            | Error::Numerical(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
