//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// The requested raw moment diverges for this family.
    #[error("moment of order {order} is infinite for {family}")]
    InfiniteMoment { family: String, order: u32 },

    /// Every coefficient cancelled while building an exponential polynomial.
    #[error("exponential polynomial is identically zero")]
    ZeroPolynomial,

    /// Two candidate roots could not be separated at working precision.
    #[error("residual uncertainty near x = {near}: candidate roots closer than tolerance")]
    ResidualUncertainty { near: f64 },

    /// All samples of a scanned function fell inside the deadband.
    #[error("function is numerically zero on the whole scan window")]
    IndeterminateFunction,

    #[error("non-finite function value at x = {x}")]
    NonFiniteValue { x: f64 },

    #[error("tail underflow at x = {x}")]
    TailUnderflow { x: f64 },

    #[error("zero density at x = {x} in a log-form criterion")]
    ZeroDensity { x: f64 },

    #[error("analytic and numeric checks disagree: {0}")]
    Disagreement(String),

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("parse error at `{token}`: {message}")]
    Parse { token: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(token: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            message: message.into(),
        }
    }
}
