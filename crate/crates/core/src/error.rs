//! Error types for the whole crate.

use thiserror::Error;

/// Errors produced by validation, domain checks, and numerical procedures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {residual:.3e} > {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("eigenvalue {value:.6e} is outside the domain of {func}")]
    EigenvalueDomain { value: f64, func: String },

    #[error("matrix is not strictly positive (min eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },

    #[error("trace is {trace:.12e}, expected {expected}")]
    InvalidTrace { trace: f64, expected: f64 },

    #[error("perturbed matrix left the faithful cone (min eigenvalue {min_eig:.3e})")]
    StateRange { min_eig: f64 },

    #[error("Kraus operators are not trace preserving (completeness residual {residual:.3e})")]
    KrausIncomplete { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alpha = {alpha} is outside this operation's domain: {reason}")]
    AlphaDomain { alpha: f64, reason: String },

    #[error("numerical failure in {what} (residual {residual:.3e})")]
    Numerical { what: String, residual: f64 },

    #[error("quadrature did not converge (residual {residual:.3e} > tolerance {tol:.3e})")]
    QuadratureDiverged { residual: f64, tol: f64 },

    #[error("extrapolation diverged; raw sequence: {sequence:?}")]
    ExtrapolationDiverged { sequence: Vec<f64> },

    #[error("metric matrix is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("kernel evaluation is non-finite at t = {t}")]
    KernelNonFinite { t: f64 },

    #[error("missing derivative of order {order} for custom scalar function")]
    MissingDerivative { order: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
