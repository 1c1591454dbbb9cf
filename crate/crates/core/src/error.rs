use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: {0}")]
    DimError(String),
    #[error("invalid distance {0} m (must be positive)")]
    InvalidDistance(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical error: {0}")]
    NumericalError(String),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("rank-one restoration failed: {0}")]
    RestorationFailure(String),
    #[error("degenerate null space: {0}")]
    DegenerateNullSpace(String),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("solver stopped without an optimal point: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
