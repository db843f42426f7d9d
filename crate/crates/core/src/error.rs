use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point outside the domain of the map: {0}")]
    Domain(String),

    #[error("polynomial is not divisible by (z - {zeta}): remainder {remainder:e}")]
    NotDivisible { zeta: String, remainder: f64 },

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("quadrature did not converge at {0}")]
    Quadrature(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
