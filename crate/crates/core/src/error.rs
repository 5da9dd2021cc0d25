use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the solvers. Numeric payloads are widened to `f64`
/// so the error type does not depend on the scalar parameter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quantity {quantity} is outside the demand domain")]
    Domain { quantity: f64 },
    #[error("quantity {quantity} lies beyond the last tabulated knot {last_knot}")]
    Extrapolation { quantity: f64, last_knot: f64 },
    #[error("cost {cost} is not below the choke price P(0) = {p0}")]
    InvalidCost { cost: f64, p0: f64 },
    #[error("no quantity with price below cost {cost} found (searched up to {searched_to})")]
    NoBracket { cost: f64, searched_to: f64 },
    #[error(
        "best-response iteration did not converge after {iterations} steps (residual {residual})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("condition (C) fails: clause ({clause})")]
    ConditionCViolated { clause: String },
    #[error("sweep point c[{c_index}], b[{b_index}] is invalid: {reason}")]
    InvalidSweepPoint {
        c_index: usize,
        b_index: usize,
        reason: String,
    },
    #[error("failed to load demand table: {0}")]
    Table(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoBracket { .. }
                | Error::NoConvergence { .. }
                | Error::ConditionCViolated { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
