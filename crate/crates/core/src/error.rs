use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the model's domain (for example `delta <= -1`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data or configuration is inconsistent.
    #[error("validation error: {0}")]
    Validation(String),

    /// The estimator needs the arrival sequence `(m_t)` but only a snapshot was given.
    #[error("missing history: {0}")]
    MissingHistory(String),

    /// A series or solver produced a value that cannot be trusted.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by the computation itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Validation(_) | Error::MissingHistory(_) | Error::Format(_)
        )
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > -1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must satisfy delta > -1, got {delta}")))
    }
}
