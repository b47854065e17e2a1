use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be nonnegative, got {value}")]
    NegativeArgument { what: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid event sequence `{id}`: {reason}")]
    InvalidSequence { id: String, reason: String },

    #[error("event type {index} out of range for {num_types} types")]
    TypeOutOfRange { index: usize, num_types: usize },

    #[error("transition matrix violates `{invariant}`: {detail}")]
    InvalidTransitionMatrix { invariant: &'static str, detail: String },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch { context: &'static str, expected: String, found: String },

    #[error("intensity is zero at event {event} of sequence `{sequence}`")]
    ZeroIntensity { sequence: String, event: usize },

    #[error("process is unstable: spectral radius {radius} >= 1")]
    Unstable { radius: f64 },

    #[error("SVD of a {rows}x{cols} matrix did not converge within {max_sweeps} sweeps")]
    SvdNoConvergence { rows: usize, cols: usize, max_sweeps: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset contains no events")]
    NoEvents,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn shape(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch { context, expected: expected.to_string(), found: found.to_string() }
    }
}
