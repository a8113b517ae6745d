use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("mode m = 0 has no neutral Rayleigh number")]
    NoNeutralMode,

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("quotient undefined: {0}")]
    Undefined(String),

    #[error("no ring attractor: growth rate {beta} is not positive")]
    NoRing { beta: f64 },

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("under-resolved grid: {0}")]
    UnderResolved(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
