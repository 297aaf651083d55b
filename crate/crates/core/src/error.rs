use thiserror::Error;

use crate::solver::SolveResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("primal-dual pair is not feasible (duality gap is +infinity)")]
    InfeasiblePair,
    #[error("negative radicand {0:e} in ball radius")]
    NegativeRadicand(f64),
    #[error("linkage condition violated: {0}")]
    LinkageViolated(String),
    #[error("operation requires {expected}")]
    WrongFamily { expected: &'static str },
    #[error("solver did not reach gap tolerance {tolerance:e} (best gap {best_gap:e}) after {iterations} iterations")]
    SolverFailed {
        tolerance: f64,
        best_gap: f64,
        iterations: usize,
        partial: Box<SolveResult>,
    },
    #[error("safeness violated: {0}")]
    SafenessViolated(String),
    #[error("in {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
