//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by sampling, linear algebra and the analysis pipelines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A requested sample index is not present in the trace / schedule.
    #[error("sample unavailable at index {index}")]
    SampleUnavailable { index: i64 },

    /// Bad numerical input (non-finite entries, empty matrix, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested model order exceeds the numerically detected rank.
    #[error("order mismatch: requested {requested}, detected rank {detected}")]
    OrderMismatch { requested: usize, detected: usize },

    /// Decimation factor and shift are not coprime.
    #[error("decimation {r} and shift {rho} are not coprime")]
    NotCoprime { r: i64, rho: i64 },

    /// A zero eigenvalue where modulus/argument extraction is required.
    #[error("invalid eigenvalue: zero or non-finite")]
    InvalidEigenvalue,

    /// A coefficient too small to divide by; signals a possible cancellation.
    #[error("degenerate coefficient at position {index}; collision analysis required")]
    DegenerateCoefficient { index: usize },

    /// Group order search exhausted the shift budget without a rank plateau.
    #[error("inconclusive group order for group {group}: rank profile {ranks:?}")]
    InconclusiveOrder { group: usize, ranks: Vec<usize> },

    /// Detected order exceeds the configured term budget N.
    #[error("detected order {detected} exceeds the term budget {budget}; raise N")]
    BudgetExceeded { detected: usize, budget: usize },

    /// A sampling schedule produced a negative time index.
    #[error("invalid schedule: j={j}, k={k} gives negative index {index}")]
    InvalidSchedule { j: i64, k: i64, index: i64 },

    /// Noise calibration on an all-zero signal.
    #[error("invalid calibration: signal power is zero on the base grid")]
    InvalidCalibration,

    /// Inconsistent sampling scheme parameters.
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    /// Invalid model parameters.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Eigenvalue iteration failed to converge.
    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    /// An analysis stage failed; wraps the underlying error with the stage name.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
