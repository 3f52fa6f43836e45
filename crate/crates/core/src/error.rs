use thiserror::Error;

/// Everything that can go wrong in the pool math, simulators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("reserves must be strictly positive, got ({x}, {y})")]
    NonPositiveReserves { x: f64, y: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("trade decreases the invariant from {before} to {after}")]
    InvariantViolation { before: f64, after: f64 },

    #[error("root finding failed: {0}")]
    RootNotBracketed(&'static str),

    #[error("negative Riccati discriminant {0}: no real value-function coefficient")]
    NegativeDiscriminant(f64),

    #[error("degenerate Riccati coefficient equation: {0}")]
    DegenerateRiccati(&'static str),

    #[error("value iteration did not converge after {iterations} iterations (last sup-norm change {change})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("singular linear system in policy evaluation")]
    SingularSystem,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: timestamp {timestamp} does not increase on the previous observation")]
    NonMonotoneTimestamp { line: usize, timestamp: i64 },
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: impl Into<f64>, range: &'static str) -> Self {
        Error::OutOfRange {
            name,
            value: value.into(),
            range,
        }
    }

    /// True for errors caused by malformed external input data.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::NonMonotoneTimestamp { .. })
    }

    /// True for errors caused by caller-supplied parameters.
    pub fn is_parameter_error(&self) -> bool {
        matches!(self, Error::OutOfRange { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
