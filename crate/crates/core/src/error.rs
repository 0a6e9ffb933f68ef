use thiserror::Error;

/// Errors raised by the toolkit's numerical operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Finite-difference stencil would cross or touch the symmetry axis.
    #[error("point r = {r} is within the stencil width {h} of the axis and the field has no analytic derivatives")]
    AxisSingularity { r: f64, h: f64 },

    #[error("field is missing its pressure profile")]
    MissingPressure,

    #[error("kernel evaluated on the diagonal (r = rho = {r}, zeta = 0)")]
    Diagonal { r: f64 },

    /// Quadrature could not meet its tolerance within the panel budget.
    #[error("tolerance {tol:e} not reached: best estimate {estimate} with error {error:e}")]
    ToleranceNotReached { estimate: f64, error: f64, tol: f64 },

    #[error("exponent {alpha} outside the admissible range for regime {regime}")]
    InadmissibleExponent { alpha: f64, regime: &'static str },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("infeasible exponents: {0}")]
    Infeasible(String),

    #[error("level sets under-resolved: {0}")]
    UnderResolved(String),

    #[error("not enough usable samples: {kept} kept, at least {needed} needed")]
    TooFewSamples { kept: usize, needed: usize },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
