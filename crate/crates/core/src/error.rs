use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RotationError {
    #[error("core transformation is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("cores do not form a turnover pattern (indices {found:?})")]
    IndexPattern { found: [usize; 3] },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriangularError {
    #[error("spike has length {found}, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("index {index} out of range for size {size}")]
    Index { index: usize, size: usize },
    #[error("last spike entry is zero")]
    SingularSpike,
    #[error(transparent)]
    Rotation(#[from] RotationError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("polynomial has no coefficients")]
    Empty,
    #[error("all coefficients are zero")]
    AllZero,
    #[error("polynomial is constant and has no roots")]
    Constant,
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no convergence at position {position} after {sweeps} sweeps without deflation")]
    NoConvergence { position: usize, sweeps: usize },
    #[error("shift annihilates the first column at position {position}")]
    DegenerateShift { position: usize },
    #[error("eigenvalue {index} is infinite")]
    InfiniteEigenvalue { index: usize },
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Triangular(#[from] TriangularError),
}

#[derive(Debug, Error)]
pub enum BackerrError {
    #[error("reconstructed coefficients overflow")]
    Overflow,
    #[error("roots contain non-finite values")]
    NonFinite,
    #[error("{0}")]
    Degenerate(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
}
