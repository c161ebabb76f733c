use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: violations of a model precondition
/// (bad parameters, a regime where a closed form does not apply) and
/// computational limits (enumeration budgets, missing roots). The CLI maps
/// the first family to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("reservation-price equation has no root in [0, 1] (beta = {beta}, cost = {cost})")]
    NoRoot { beta: f64, cost: f64 },

    #[error(
        "exact enumeration exceeds {limit} weighted branches; use monte_carlo_outcome instead"
    )]
    EnumerationTooLarge { limit: u64 },

    #[error(
        "no symmetric pure equilibrium: mean {mu} is below the full-disclosure threshold {threshold} for n = {n}; the full-disclosure welfare formula is inapplicable"
    )]
    NoPureEquilibrium { n: usize, mu: f64, threshold: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    /// True when the error reports a violated model condition rather than a
    /// computational failure.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self,
            Error::NoRoot { .. } | Error::EnumerationTooLarge { .. }
        )
    }

    pub(crate) fn param(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
