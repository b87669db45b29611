use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerically degenerate: {0}")]
    Degenerate(String),

    #[error("points {i} and {j} are not monotone: scalar square {value:e}")]
    NotMonotone { i: usize, j: usize, value: f64 },

    #[error("samples {i} and {j} violate the 1-Lipschitz bound: |dv| = {dv}, |du| = {du}")]
    LipschitzViolation { i: usize, j: usize, du: f64, dv: f64 },

    #[error("no gap in coordinate {j}: max over C1 is {a}, min over C2 is {b}")]
    GapViolation { j: usize, a: f64, b: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
