use thiserror::Error;

/// Errors surfaced by constructions and certifications.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    BadField(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("degenerate form: {0}")]
    DegenerateForm(String),
    #[error("invalid grading: {0}")]
    InvalidGrading(String),
    #[error("construction failure: {0}")]
    Construction(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("certification failure: {0}")]
    Certification(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
