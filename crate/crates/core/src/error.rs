use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate system: {0}")]
    Degenerate(String),
    #[error("budget exceeded: {needed} evaluations > {budget}{}", hint.as_deref().map(|h| format!(" ({h})")).unwrap_or_default())]
    Budget {
        needed: u128,
        budget: u64,
        hint: Option<String>,
    },
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn budget(needed: u128, budget: u64) -> Self {
        Error::Budget {
            needed,
            budget,
            hint: None,
        }
    }
}
