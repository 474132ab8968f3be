use thiserror::Error;

use crate::gaussian::Var;

/// Errors raised by the capacity computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its physical domain.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The conditioning block of a covariance is singular or too ill-conditioned to invert.
    #[error("conditioning block {given:?} is degenerate (condition number {condition:e})")]
    DegenerateConditioning { given: Vec<Var>, condition: f64 },

    /// Label sets passed to a covariance operation are inconsistent.
    #[error("invalid label sets: {0}")]
    Labels(String),

    /// One of the two hops has zero gain, so no power allocation can carry data.
    #[error("relay hop has zero gain (gamma_sr = {gamma_sr}, gamma_rd = {gamma_rd})")]
    InfeasibleRelay { gamma_sr: f64, gamma_rd: f64 },

    /// The source transmits no power; the correlation coefficient is undefined.
    #[error("source power is zero; correlation coefficient is undefined")]
    DegenerateSource,

    /// The amplification factor would drive the relay above its power budget.
    #[error("amplification factor {beta} exceeds the relay power limit {limit}")]
    PowerViolation { beta: f64, limit: f64 },

    /// The matrix handed to [`crate::gaussian::LabeledCovariance::new`] is not a covariance.
    #[error("not a covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("sweep analysis needs at least 3 rows, got {0}")]
    TooFewRows(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: ">= 0",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "> 0",
        })
    }
}
