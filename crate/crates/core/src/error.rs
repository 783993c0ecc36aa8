use thiserror::Error;

pub type Result<T> = std::result::Result<T, PurityError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PurityError {
    #[error("matrix is not Hermitian: max |A - A^dag| entry = {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {total} does not factor as {first} x {second}")]
    NotFactorizable { total: usize, first: usize, second: usize },

    #[error("Schatten exponent p = {0} is below 1")]
    InvalidExponent(f64),

    #[error("map is not completely positive and trace preserving: {0}")]
    NotCptp(String),

    #[error("output positivity violated (min eigenvalue {min_eigenvalue:.3e}); map is not CP")]
    OutputNotPositive { min_eigenvalue: f64 },

    #[error("invalid channel parameters: {0}")]
    InvalidParameters(String),

    #[error("no common eigenvector: best residual {best_residual:.3e}")]
    NoCommonEigenvector { best_residual: f64 },

    #[error("dimension {dim} exceeds the supported limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}
