use thiserror::Error;

/// Errors raised by the decay library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecayError {
    /// An input violates a documented invariant or precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its panel budget.
    #[error(
        "quadrature did not converge: worst point t={worst_point}, estimated error {worst_error:e} > tolerance {tolerance:e}"
    )]
    NonConvergence {
        worst_point: f64,
        worst_error: f64,
        tolerance: f64,
    },

    /// The rejection envelope fell below the density.
    #[error("rejection envelope violated at t={t}: density {density:e} > envelope {envelope:e} (acceptance rate {acceptance:.4})")]
    Envelope {
        t: f64,
        density: f64,
        envelope: f64,
        acceptance: f64,
    },

    /// The optimizer ran out of iterations on every start.
    #[error("fit did not converge after {iterations} iterations (last chi2 {chi2}, gradient norm {gradient_norm:e}); trace: {trace}")]
    FitNonConvergence {
        iterations: usize,
        chi2: f64,
        gradient_norm: f64,
        trace: String,
    },

    /// Normal equations could not be solved.
    #[error("singular normal equations: {0}; try rescaling the parameters (e.g. time units) so they are of order one")]
    Singular(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, DecayError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(DecayError::Domain(msg.into()))
}

impl From<std::io::Error> for DecayError {
    fn from(e: std::io::Error) -> Self {
        DecayError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for DecayError {
    fn from(e: serde_json::Error) -> Self {
        DecayError::Parse(e.to_string())
    }
}
