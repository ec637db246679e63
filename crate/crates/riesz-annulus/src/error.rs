use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The collocation system is too ill-conditioned to trust.
    #[error("ill-conditioned collocation system: cond estimate {cond:.3e} exceeds {limit:.3e}")]
    IllConditioned { cond: f64, limit: f64 },

    /// A solve finished but failed its residual gate.
    #[error("residual check failed: max |V| = {residual:.3e} at x = {at:.6} (allowed {allowed:.3e})")]
    ResidualCheck { residual: f64, at: f64, allowed: f64 },

    /// An iteration produced an internally inconsistent state.
    #[error("internal consistency error: {0}")]
    Inconsistent(String),

    /// Root bracketing failed.
    #[error("bracketing failed: {0}")]
    Bracket(String),

    /// I/O error while writing outputs.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON serialization error.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
