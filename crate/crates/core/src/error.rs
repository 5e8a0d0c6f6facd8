use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the range an operation supports.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The argument lies outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its refinement limit before reaching the tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    /// A WKB evaluation was requested too close to a turning point.
    #[error("phi = {phi} is within {delta} of a turning point")]
    Proximity { phi: f64, delta: f64 },

    /// Input data violates a precondition (e.g. non-positive errors for a log fit).
    #[error("invalid data: {0}")]
    InvalidData(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
