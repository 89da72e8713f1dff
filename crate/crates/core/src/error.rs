//! Crate-wide error type.

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Matrix or vector dimensions do not match what the operation needs.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// An input lies outside the mathematical domain of the operation
    /// (nonpositive log argument, power out of range, and the like).
    #[error("domain error: {0}")]
    Domain(String),
    /// A structural parameter is invalid (infeasible rate grid, length
    /// mismatch, bad multiplier).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// An iterative solver ran out of iterations before reaching its
    /// tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// The requested maximization has no finite optimum.
    #[error("unbounded objective: {0}")]
    Unbounded(String),
    /// A conditional correlation is undefined because a conditional
    /// variance vanishes.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    /// The feature Gram matrix is too ill-conditioned to whiten; retry
    /// with a lower feature degree.
    #[error("ill-conditioned feature system: {0}")]
    IllConditioned(String),
}

pub type Result<T> = core::result::Result<T, Error>;
