use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A parse failure with a 1-based source location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Coarse error classes, used by the command-line front end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Validation,
    Numeric,
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorCategory::Parse => "parse",
            ErrorCategory::Validation => "validation",
            ErrorCategory::Numeric => "numeric",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid Pauli label {label:?}: {reason}")]
    InvalidLabel { label: String, reason: String },

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("qubit {qubit} used more than once")]
    QubitCollision { qubit: usize },

    #[error("gate matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("{n} qubits exceeds the limit of {max} for {what}")]
    TooManyQubits {
        n: usize,
        max: usize,
        what: &'static str,
    },

    #[error("shots must be positive")]
    ZeroShots,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unidentifiable model: anticommutation matrix has {} null-space direction(s)", null_space.len())]
    Unidentifiable { null_space: Vec<Vec<f64>> },

    #[error("probe {probe}: only {usable} usable depth(s), need at least 2")]
    InsufficientDepths { probe: String, usable: usize },

    #[error("state purity {purity:.3e} too small for distillation")]
    DegeneratePurity { purity: f64 },

    #[error("{models} noise model(s) supplied for {layers} two-qubit layer(s)")]
    LayerModelMismatch { layers: usize, models: usize },

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("observable acts on qubit {qubit} at its cut time")]
    ObservableAtCut { qubit: usize },

    #[error("linear solve residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    SolverResidual { residual: f64, threshold: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("malformed document: {0}")]
    Format(String),

    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse(_) | Error::InvalidLabel { .. } | Error::Format(_) => ErrorCategory::Parse,
            Error::NonUnitary { .. }
            | Error::Unidentifiable { .. }
            | Error::InsufficientDepths { .. }
            | Error::DegeneratePurity { .. }
            | Error::SolverResidual { .. }
            | Error::NonFinite(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Validation,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn check_size(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected, found })
    }
}
