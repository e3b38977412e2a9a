use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("ideal point is not normalized (q(o, xi) = {0}); call IdealPoint::normalized first")]
    NotNormalized(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("near-singular K_f: factor {factor} has H eigenvalue {eigenvalue:.9} >= 1 - 1e-6")]
    NearSingular { factor: usize, eigenvalue: f64 },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("barycenter solver did not converge after {iterations} iterations (|grad| = {gradient_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
        /// Factor coordinates of the last iterate.
        last_iterate: Vec<Vec<f64>>,
    },

    #[error("natural map degenerate: {0}")]
    Underflow(String),

    #[error("point ({0}, {1}) lies outside the grid extent")]
    OutOfExtent(f64, f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}
