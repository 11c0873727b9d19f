//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by the numerical operations and the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two points that must be distinct coincide.
    #[error("singular input: {0}")]
    SingularInput(String),
    /// The operation is not available for the requested domain variant.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A series or quadrature could not reach the requested tolerance.
    #[error("accuracy: achieved error bound {bound:e} exceeds tolerance {tol:e}")]
    Accuracy { bound: f64, tol: f64 },
    /// The datum term has no interior critical scale (d_{R^-1} g <= 0).
    #[error("no interior critical scale: datum divergence {0} is not positive")]
    NoCriticalScale(f64),
    /// The datum gradient vanishes, so rotation extremals are degenerate.
    #[error("degenerate datum: gradient vanishes at the query point")]
    DegenerateDatum,
    /// A configuration violates the separation or scale constraints.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    /// A sampled field violates its boundary condition.
    #[error("invalid field: {0}")]
    InvalidField(String),
    /// The Newton search left its box or failed to converge.
    #[error("search failure after {iterations} iterations: {reason}")]
    SearchFailure {
        iterations: usize,
        reason: String,
        trajectory: Vec<f64>,
    },
    /// The boundary-positivity certificate failed.
    #[error("certificate failure in block {block}: {detail}")]
    CertificateFailure { block: usize, detail: String },
    /// File system error.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization error.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// CSV emission error.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
