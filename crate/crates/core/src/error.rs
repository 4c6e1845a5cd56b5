use thiserror::Error;

/// Errors raised by the simulator and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Row scaling left the frame numerically rank deficient.
    #[error("degenerate state{}: {reason}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    DegenerateState { step: Option<usize>, reason: String },

    #[error("argument within {distance:e} of a pole")]
    PoleProximity { distance: f64 },

    #[error("integration diverged at t = {t} (max f = {max_value:e}); retry with a smaller dt")]
    Divergence { t: f64, max_value: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches a step index to a degenerate-state error.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            Error::DegenerateState { reason, .. } => Error::DegenerateState {
                step: Some(step),
                reason,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
