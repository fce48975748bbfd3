//! Error type shared by all numerical operations.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameter or configuration value.
    InvalidInput(String),
    /// An iterative solver failed to converge.
    NoConvergence(String),
    /// Singular linear system encountered (e.g. Hessian at a Newton iterate).
    SingularMatrix(String),
    /// Exponential weight would overflow; the caller should shift the
    /// reference point of the weight.
    WeightOverflow { c: f64, exponent: f64 },
    /// A search bracket does not contain the sought object.
    BracketFailure(String),
    /// Non-finite values appeared during a simulation (blow-up).
    BlowUp { time: f64 },
    /// The invasion point reached the right safety margin of the domain.
    DomainExhausted { time: f64, position: f64 },
    /// A verdict could not be reached (semi-decidable test stayed ambiguous).
    Inconclusive(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NoConvergence(msg) => write!(f, "no convergence: {msg}"),
            Error::SingularMatrix(msg) => write!(f, "singular matrix: {msg}"),
            Error::WeightOverflow { c, exponent } => write!(
                f,
                "exponential weight overflow (c = {c}, exponent = {exponent}); \
                 use a larger weight reference"
            ),
            Error::BracketFailure(msg) => write!(f, "bracket failure: {msg}"),
            Error::BlowUp { time } => write!(f, "solution blew up at t = {time}"),
            Error::DomainExhausted { time, position } => write!(
                f,
                "invasion point {position} entered the right safety margin at t = {time}"
            ),
            Error::Inconclusive(msg) => write!(f, "inconclusive: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
