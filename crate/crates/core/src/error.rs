use thiserror::Error;

use crate::bits::Bits;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input, unsatisfiable constraints, rejected designs.
    Validation,
    /// A configured size cap was exceeded.
    Capacity,
    /// A residual or unitarity check failed.
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsatisfiable: no assignment of {num_vars} variables satisfies all {clauses} clauses")]
    Unsatisfiable { num_vars: usize, clauses: usize },

    #[error("capacity exceeded: {what} is {got}, limit is {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("graph is disconnected (vertex {unreachable} unreachable from vertex 0)")]
    Disconnected { unreachable: usize },

    #[error("state set is not 2-SAT definable: the recovered clauses also admit {spurious}")]
    NotTwoSat { spurious: Bits },

    #[error("{what}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Numerical {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Unsatisfiable { .. }
            | Error::Invalid(_)
            | Error::Disconnected { .. }
            | Error::NotTwoSat { .. }
            | Error::Parse { .. } => ErrorKind::Validation,
            Error::Capacity { .. } => ErrorKind::Capacity,
            Error::Numerical { .. } => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
