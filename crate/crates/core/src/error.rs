use alloc::string::String;

/// Error type shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("dimension {dim} exceeds the configured maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("quasiprojector gap violated at hbar = {hbar:?}: ‖a − a²‖ = {defect} > 3/16")]
    GapViolation { hbar: Option<f64>, defect: f64 },
    #[error("eigenvalue {eigenvalue} lies within tolerance of the threshold {threshold}")]
    DegenerateSpectrum { eigenvalue: f64, threshold: f64 },
    #[error("rank not constant across the grid tail: {ranks:?}")]
    NonConvergent { ranks: alloc::vec::Vec<usize> },
    #[error("quadrature did not converge: successive orders differ by {difference}")]
    Precision { difference: f64 },
    #[error("singular value {value} straddles the rank tolerance {threshold}; raise the truncation")]
    Indeterminate { value: f64, threshold: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
