use thiserror::Error;

/// Errors raised by table construction, queries, quadrature and the pipelines built on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::lattice::MAX_DIM)]
    Dimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid box: lower corner {lo:?} exceeds upper corner {hi:?}")]
    InvalidBox { lo: Vec<f64>, hi: Vec<f64> },

    #[error("query {query:?} exceeds the table horizon {horizon:?}")]
    OutOfRange { query: Vec<f64>, horizon: Vec<f64> },

    #[error("table of {cells} cells exceeds the memory budget of {budget} cells")]
    ResourceExhausted { cells: u128, budget: usize },

    #[error("integrand returned a non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("inner integral did not stabilize at outer node {node:?} (last two rungs {last:?})")]
    InnerNotStabilized { node: Vec<f64>, last: [f64; 2] },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed table file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
