use thiserror::Error;

/// Errors raised by the estimation library.
///
/// The variants are grouped so that callers (notably the CLI) can map them
/// onto a small exit-code taxonomy: parameter/data problems versus numerical
/// or method failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RcvError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("sample too small: need at least {min} observations, got {got}")]
    SampleSize { min: usize, got: usize },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("undefined moment: {0}")]
    UndefinedMoment(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("GLD fit failed: {0}")]
    FitFailure(String),

    #[error("unbounded interval: {0}")]
    UnboundedInterval(String),

    #[error("method failure: {0}")]
    MethodFailure(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl RcvError {
    /// True for errors caused by bad input data or parameters rather than a
    /// numerical breakdown inside an otherwise valid computation.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            RcvError::Parameter(_)
                | RcvError::Domain(_)
                | RcvError::SampleSize { .. }
                | RcvError::InvalidSample(_)
                | RcvError::Parse { .. }
                | RcvError::Io(_)
        )
    }
}

impl From<std::io::Error> for RcvError {
    fn from(e: std::io::Error) -> Self {
        RcvError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RcvError>;
