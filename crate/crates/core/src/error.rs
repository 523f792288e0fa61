use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite sample {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("power iteration did not converge after {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("negative density value {value:e} at node {node}")]
    NegativeDensity { node: usize, value: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("digit law not normalized: tail mass {tail:e}")]
    Normalization { tail: f64 },

    #[error("digit undefined at the transformed point 0 (measure-zero event)")]
    UndefinedDigit,

    #[error("the i = 1 Lasota-Yorke range is deferred to prior work; no constant is available")]
    DeferredIndex,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::Singular(_)
                | Error::NegativeDensity { .. }
                | Error::Consistency(_)
                | Error::Normalization { .. }
        )
    }
}
