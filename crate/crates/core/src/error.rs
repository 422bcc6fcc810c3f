use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// The CLI maps [`Error::Config`] and [`Error::Coverage`] to exit code 2 and
/// everything else to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no convergence after {sweeps} sweeps (last change {last_change:e})")]
    NoConvergence { sweeps: usize, last_change: f64 },
    #[error("coverage violation: behavior policy never takes action {action} in state {state}, but the target policy does")]
    Coverage { state: usize, action: usize },
    #[error("fixed point check failed: residual {0:e}")]
    FixedPoint(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Coverage { .. } | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
