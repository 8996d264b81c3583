use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid circuit specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular or numerically not invertible: {0}")]
    SingularMatrix(String),

    #[error("Hilbert-space dimension {dim} exceeds the configured ceiling {ceiling}")]
    DimensionOverflow { dim: usize, ceiling: usize },

    #[error(
        "eigensolver did not converge after {iterations} iterations (residual norm {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("eigenvectors were not retained for this spectrum")]
    MissingEigenvectors,

    #[error("degenerate fit: {0}")]
    FitDegenerate(String),

    #[error("solver failed at grid point {index}: {source}")]
    GridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
