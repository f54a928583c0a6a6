use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("discipline mismatch: expected {expected}, got {got}")]
    DisciplineMismatch { expected: String, got: String },
    #[error("space mismatch: expected {expected}, got {got}")]
    SpaceMismatch { expected: String, got: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported map family: {0}")]
    UnsupportedMapFamily(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// True for errors caused by malformed user input rather than broken contracts.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidCode(_) | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
