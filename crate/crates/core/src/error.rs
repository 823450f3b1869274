use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loaders and metric computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cycle detected: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("duplicate name: {0}")]
    DuplicateName(String),
    #[error("unknown variable: {0}")]
    UnknownVariable(String),
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("non-finite value in column {column} at row {row}")]
    NonFinite { column: String, row: usize },
    #[error("categorical code {code} out of range for column {column} (cardinality {cardinality})")]
    CodeOutOfRange { column: String, code: f64, cardinality: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
            Error::Cycle(_) => "cycle",
            Error::DuplicateName(_) => "duplicate-name",
            Error::UnknownVariable(_) => "unknown-variable",
            Error::RaggedRow { .. } => "ragged-row",
            Error::NonFinite { .. } => "non-finite",
            Error::CodeOutOfRange { .. } => "code-out-of-range",
            Error::Shape(_) => "shape",
            Error::Invalid(_) => "invalid",
            Error::Degenerate(_) => "degenerate",
        }
    }

    pub fn is_not_found(&self) -> bool {
        matches!(self, Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
