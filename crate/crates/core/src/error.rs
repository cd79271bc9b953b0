use num_complex::Complex64;
use thiserror::Error;

use crate::control::ControlSolution;
use crate::simulation::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("root polishing failed for {root} (residual {residual:e})")]
    RootPolish { root: Complex64, residual: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64, partial: Box<Trajectory> },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64, partial: Box<Trajectory> },

    #[error("control problem infeasible: best constraint residual {best_residual:e}")]
    Infeasible {
        best_residual: f64,
        best: Box<ControlSolution>,
    },

    #[error("invalid control problem: {0}")]
    InvalidProblem(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
