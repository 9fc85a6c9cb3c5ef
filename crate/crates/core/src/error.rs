use thiserror::Error;

/// Errors produced by the Gaussianization toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data is malformed (non-finite entries, too few rows, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// Matrix shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    Decomposition { pivot: usize, value: f64 },

    /// A re-ranking plan violates its constraints.
    #[error("invalid re-ranking plan: {0}")]
    Plan(String),

    /// Model fitting failed.
    #[error("fit failed: {0}")]
    Fit(String),

    /// A statistical test cannot be computed on the given sample.
    #[error("test error: {0}")]
    Test(String),

    /// No usable candidate during parameter selection.
    #[error("selection error: {0}")]
    Selection(String),

    /// Model file could not be read or written.
    #[error("model format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
