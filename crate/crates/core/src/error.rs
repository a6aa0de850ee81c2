use thiserror::Error;

use crate::grid::GridSignal;

/// Hypothesis tags reported by the audit and carried by hypothesis errors.
pub mod tag {
    pub const L: &str = "L";
    pub const W1: &str = "W1";
    pub const W2: &str = "W2";
    pub const W3: &str = "W3";
    pub const WF: &str = "Wf";
}

/// State of the best iterate when a solver branch gives up.
#[derive(Debug, Clone)]
pub struct Stalled {
    pub branch: &'static str,
    pub iterations: usize,
    pub action: f64,
    pub gradient_x_norm: f64,
    pub best: GridSignal,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("zero-frequency mode is singular: |mean| = {mean:e} exceeds tolerance {tol:e}")]
    SingularMode { mean: f64, tol: f64 },
    #[error("signal does not decay at the grid boundary: |u| = {boundary:e} > {tol:e}")]
    DomainTruncation { boundary: f64, tol: f64 },
    #[error("Sobolev embedding into bounded functions needs alpha > 1/2, got {0}")]
    EmbeddingFails(f64),
    #[error("hypothesis ({tag}) violated: {detail}")]
    Hypothesis { tag: &'static str, detail: String },
    #[error("forcing is not admissible: beta = {beta:e} <= 0")]
    Inadmissible { beta: f64 },
    #[error("preconditioner shift must be positive, got {0}")]
    Preconditioner(f64),
    #[error("mountain-pass geometry lost: path max {path_max:e} < beta {beta:e} with gradient {gradient:e}")]
    GeometryViolation {
        path_max: f64,
        beta: f64,
        gradient: f64,
    },
    #[error("{} branch did not converge after {} iterations: {} (I = {:e}, |grad| = {:e})",
        .0.branch, .0.iterations, .0.reason, .0.action, .0.gradient_x_norm)]
    NonConvergence(Box<Stalled>),
}

impl Error {
    pub fn hypothesis(tag: &'static str, detail: impl Into<String>) -> Self {
        Error::Hypothesis {
            tag,
            detail: detail.into(),
        }
    }

    /// Hypothesis tag for errors that stem from a violated assumption.
    pub fn hypothesis_tag(&self) -> Option<&'static str> {
        match self {
            Error::Hypothesis { tag, .. } => Some(tag),
            Error::Inadmissible { .. } => Some(tag::WF),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
