use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical blow-up at t = {time}")]
    BlowUp { time: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("operator 1 + a3*d_xx + a4*d_xxxx is not invertible at wavenumber {xi}")]
    NonInvertibleSymbol { xi: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("interpolation system is singular (condition number {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("degenerate normalization: |c0| = {c0:e}")]
    DegenerateNormalization { c0: f64 },

    #[error("indeterminate propagation speed: {0}")]
    IndeterminateSpeed(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no commensurate domain length up to {cap}")]
    NoCommensurateLength { cap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
