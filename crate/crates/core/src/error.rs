use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix of dimension {dim} needs {expected} entries, got {got}")]
    EntryCount {
        dim: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("order {order} outside supported range {min}..={max}")]
    OrderOutOfRange { order: usize, min: usize, max: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not representable in the commutator basis: {0}")]
    NotRepresentable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
