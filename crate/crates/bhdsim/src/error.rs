//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Domain violations are
//! reported eagerly with the offending value in the message rather than
//! clamped or propagated as NaN.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its subdivision budget. The message
    /// carries the best estimate and its error bound so a caller can decide
    /// whether the partial result is usable.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         best estimate {best_estimate}, error bound {error_bound:e}"
    )]
    Convergence {
        best_estimate: String,
        error_bound: f64,
        subdivisions: usize,
    },

    /// A first-order mode expansion was requested outside its validity range.
    #[error("truncation domain error: {0}")]
    Truncation(String),

    /// The closed-form homodyne mean assumes phase-matched sources.
    #[error(
        "closed form requires phi_plus = phi_minus = phi_lo \
         (got phi_plus = {phi_plus}, phi_minus = {phi_minus}, phi_lo = {phi_lo}); \
         mismatched phases must go through the Monte Carlo path"
    )]
    PhaseContract {
        phi_plus: f64,
        phi_minus: f64,
        phi_lo: f64,
    },

    /// Configuration file rejected; names the key and 1-based line.
    #[error("parse error at line {line}, key `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn truncation(msg: impl Into<String>) -> Self {
        Error::Truncation(msg.into())
    }

    pub fn parse(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            key: key.into(),
            message: message.into(),
        }
    }
}
