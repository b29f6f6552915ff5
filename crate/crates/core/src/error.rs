use std::fmt;

/// Errors raised by the shape-calculus toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid gauge function: {0}")]
    InvalidGauge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    #[error("under-resolved request: {0}")]
    UnderResolved(String),

    #[error("problem definition incomplete: coefficient `{0}` has no second derivatives")]
    MissingDerivative(&'static str),

    #[error("ellipticity violated: {0}")]
    Ellipticity(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("solver breakdown in {0}")]
    Breakdown(&'static str),

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// `true` for failures of an iterative or linear solver, as opposed to
    /// invalid input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::Breakdown(_) | Error::Ellipticity(_) | Error::DegenerateMesh(_)
        )
    }

    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidArgument(msg.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
