use thiserror::Error;

/// Failures reported by the library. Every variant is a caller-side problem;
/// nothing here signals an internal bug.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: String },
    #[error("measure is not closed: |first moment| = {moment:e}")]
    NotClosed { moment: f64 },
    #[error("non-convex vertex sequence at vertex {index}")]
    NonConvex { index: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("negative density: minimum {min:e} at t = {at}")]
    NegativeDensity { min: f64, at: f64 },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("divergence: {0}")]
    Divergence(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid",
            Error::Domain { .. } => "domain",
            Error::NotClosed { .. } => "not_closed",
            Error::NonConvex { .. } => "non_convex",
            Error::Unsupported(_) => "unsupported",
            Error::NegativeDensity { .. } => "negative_density",
            Error::Parse { .. } => "parse",
            Error::Divergence(_) => "divergence",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn domain(value: f64, domain: impl Into<String>) -> Self {
        Error::Domain {
            value,
            domain: domain.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
