use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqccError {
    #[error("non-physical covariance (a = {a}, b = {b}, c = {c}): {reason}")]
    NonPhysicalCovariance {
        a: f64,
        b: f64,
        c: f64,
        reason: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gain {gain} has no physical equivalent channel: {reason}")]
    GainOutOfDomain { gain: f64, reason: &'static str },

    #[error("numeric underflow: {0}")]
    NumericUnderflow(String),

    #[error("every point of the search box failed to evaluate")]
    EmptyFeasibleSet,

    #[error(transparent)]
    Fock(#[from] sqcc_fock::FockError),
}

pub type Result<T> = std::result::Result<T, SqccError>;

pub(crate) fn domain(msg: impl Into<String>) -> SqccError {
    SqccError::Domain(msg.into())
}
