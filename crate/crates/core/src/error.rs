use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("scale parameter B must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("root finder failed to converge for x = {x}")]
    RootNotFound { x: f64 },

    #[error("quantile derivative is non-positive (Q'({z}) = {value}); parameters are invalid")]
    InvalidDerivative { z: f64, value: f64 },

    #[error("minimiser failed to converge from z = {start}")]
    MinimizerFailed { start: f64 },

    #[error("quantile values are not non-decreasing; parameters are invalid")]
    NotMonotone,

    #[error("degenerate summary: octile spread E6 - E2 is zero")]
    DegenerateSummary,

    #[error("summary coordinate {coordinate} has zero variance across simulations")]
    DegenerateWeight { coordinate: usize },

    #[error("need at least {needed} observations, got {got}")]
    NotEnoughData { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(&'static str),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::RootNotFound { .. }
                | Error::InvalidDerivative { .. }
                | Error::MinimizerFailed { .. }
                | Error::NotMonotone
                | Error::DegenerateSummary
                | Error::DegenerateWeight { .. }
                | Error::NotPositiveDefinite
        )
    }
}
