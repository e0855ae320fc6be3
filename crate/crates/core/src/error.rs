use thiserror::Error;

use crate::approximator::PartialApproximation;

/// Errors produced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("level {level} is not attained by the activation")]
    UnattainableLevel { level: f64 },

    #[error("degenerate pair: x0 and x1 must differ (got {0})")]
    DegeneratePair(f64),

    #[error("coincident points: the witness needs x0 != b")]
    CoincidentPoints,

    #[error("target column {target} is not covered by any candidate")]
    InfeasibleCover { target: usize },

    #[error("point {point:?} belongs to the set it must be separated from")]
    PointInSet { point: Vec<f64> },

    #[error("sets overlap at {point:?}")]
    Overlap { point: Vec<f64> },

    #[error("grid of {requested} points exceeds the capacity of {limit}")]
    Capacity { requested: u128, limit: usize },

    #[error("row {row}: point {point:?} is not on the grid")]
    OffGrid { row: usize, point: Vec<f64> },

    #[error("row {row}: duplicate point {point:?}")]
    DuplicatePoint { row: usize, point: Vec<f64> },

    #[error("tabulated target has no value at grid point {point:?}")]
    MissingPoint { point: Vec<f64> },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction failed at {point:?}: value {value} violates {bound}")]
    ConstructionFailed {
        point: Vec<f64>,
        value: f64,
        bound: String,
    },

    #[error("no convergence after {} iterations (error {:.6e})", .0.trace.iterations.len(), .0.final_error)]
    NotConverged(Box<PartialApproximation>),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad arguments or malformed inputs, as opposed
    /// to a construction whose own post-check failed or a loop that ran out of
    /// iterations.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::ConstructionFailed { .. } | Error::NotConverged(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
