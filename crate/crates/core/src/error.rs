use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature order {0} outside 1..=256")]
    OrderOutOfRange(usize),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("tail coefficient {magnitude:e} at degree cap exceeds {tolerance:e}; raise the cap or the order")]
    TruncationTail { magnitude: f64, tolerance: f64 },
    #[error("kernel diverges on the diagonal x = y")]
    Diagonal,
    #[error("principal value did not converge: error {error:e} above tolerance {tolerance:e}")]
    PvNonConvergence { error: f64, tolerance: f64 },
    #[error("unknown estimate id `{0}`")]
    UnknownEstimate(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
