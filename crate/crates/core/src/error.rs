use thiserror::Error;

/// Errors raised across the solver and certificate pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("projection did not converge after {iterations} cycles (last movement {movement:e})")]
    NonConvergence {
        iterations: usize,
        movement: f64,
        last: Vec<f64>,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("hypothesis violated: {message} at probe {witness:?}")]
    Hypothesis { message: String, witness: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
