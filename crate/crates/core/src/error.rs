use thiserror::Error;

/// Every failure the solver pipeline can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("result not representable as a finite f64: {0}")]
    Overflow(String),

    #[error("degenerate order: m + alpha = {0} is within 1e-9 of an integer")]
    DegenerateOrder(f64),

    #[error("matching system is numerically singular (condition number {0:.3e})")]
    MatchingSingular(f64),

    #[error("extrapolation did not converge: residuals {0:?}")]
    NonConvergence(Vec<f64>),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("angle {0} rad lies inside the forward cone |phi| < {1}")]
    ForwardSingularity(f64, f64),

    #[error("insufficient cutoff: {0}")]
    InsufficientCutoff(String),

    #[error("empty or undersized angle grid: {0}")]
    EmptyGrid(String),

    #[error("vector is not unit length (|v| = {0})")]
    NonUnitVector(f64),

    #[error("non-finite amplitude")]
    NonFiniteAmplitude,

    #[error("scattered intensity is zero")]
    ZeroIntensity,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
