use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus must be an integer >= 2, got {0}")]
    InvalidModulus(u32),

    #[error("pole at s=1")]
    Pole,

    /// The requested point lies outside the half plane where the chosen
    /// representation is valid.
    #[error("Re(s) = {re} is outside Re(s) > {bound}: {context}", re = .s.re)]
    Region { s: Complex64, bound: f64, context: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sequence accessor failed at index {index}: {reason}")]
    Sequence { index: u64, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown identity '{0}'")]
    UnknownIdentity(String),

    #[error("unknown constant '{0}'")]
    UnknownConstant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
