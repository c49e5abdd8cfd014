use thiserror::Error;

/// Errors raised by the completion library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("factor {mode} coordinate {coord} is exactly zero")]
    ZeroCoordinate { mode: usize, coord: usize },

    #[error("observed value is exactly zero")]
    ZeroValue,

    #[error("index {index:?} is out of range for d={d}, N={n}")]
    IndexOutOfRange {
        index: Vec<usize>,
        d: usize,
        n: usize,
    },

    #[error("index {index:?} was observed with two different values ({first} and {second})")]
    ContradictorySamples {
        index: Vec<usize>,
        first: f64,
        second: f64,
    },

    #[error("sign system is inconsistent; samples do not come from a nonzero rank-1 tensor")]
    InconsistentSigns,

    #[error("magnitude system is inconsistent; samples do not come from a nonzero rank-1 tensor")]
    InconsistentMagnitudes,

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A linear system with no solution.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("linear system is inconsistent")]
pub struct Inconsistent;
