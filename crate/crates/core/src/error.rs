use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vectors are numerically linearly dependent (relative Gram determinant {0:e})")]
    DependentVectors(f64),
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("radius schedule needs at least {min} strictly decreasing positive radii")]
    ScheduleTooShort { min: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid source: {0}")]
    InvalidSpec(String),
    #[error("invalid rate {0:?}: expected a value in (0, 1]")]
    InvalidRate(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("decoder work {required} exceeds the cap of {cap} least-squares solves")]
    BudgetExceeded { required: u128, cap: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
