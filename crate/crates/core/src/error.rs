use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("integration failed at s = {reached_s}: {reason}")]
    Integration { reached_s: f64, reason: String },
    #[error("no run time up to {ceiling} reaches p = {p_target} (best p = {best_p})")]
    Bracket {
        ceiling: f64,
        p_target: f64,
        best_p: f64,
    },
    #[error("range error: {0}")]
    Range(String),
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
