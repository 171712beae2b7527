use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    /// Probability mass pushed beyond the truncation exceeds tolerance.
    #[error("truncation error: {lost:.3e} of the norm lies outside the retained Fock levels ({context})")]
    Truncation { lost: f64, context: &'static str },

    #[error("heralding pattern has probability {0:.3e}, too small to condition on")]
    ZeroProbability(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {mode} out of range for a {modes}-mode state")]
    BadMode { mode: usize, modes: usize },
}
