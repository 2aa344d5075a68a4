use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the numeric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("InvalidSpin: two_j = {two_j} exceeds the supported maximum {max}")]
    InvalidSpin { two_j: u32, max: u32 },

    #[error("InvalidM: m = {m} is not a projection of j = {j}")]
    InvalidM { j: String, m: String },

    #[error("DimensionMismatch: expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("NonHermitian: operator deviates from its adjoint by {deviation:e}")]
    NonHermitian { deviation: f64 },

    #[error("NotNormalized: state norm is {norm}")]
    NotNormalized { norm: f64 },

    #[error("InvalidInterval: width {delta} is outside (0, 2pi)")]
    InvalidInterval { delta: f64 },

    #[error("ZeroInformation: Fisher information {value:e} is too small for a Cramer-Rao bound")]
    ZeroInformation { value: f64 },

    #[error("UnsupportedFamily: {0}")]
    UnsupportedFamily(String),

    #[error("UnsupportedDimension: expected {expected} outcomes, found {found}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("DegenerateLikelihood: no grid point has a finite log-likelihood")]
    DegenerateLikelihood,

    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
}
