use thiserror::Error;

use crate::nehari::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature did not reach relative tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("fibering derivative has no sign change on [{t_min:e}, {t_max:e}]")]
    NoSignChange { t_min: f64, t_max: f64 },

    #[error("no convergence after {} iterations (residual {:e}, best level {})", .0.iterations, .0.residual, .0.level)]
    MaxIterations(Box<SolveReport>),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("test-function endpoint needs A > A_K (got A = {a}, ratio {ratio})")]
    BelowThreshold { a: f64, ratio: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
