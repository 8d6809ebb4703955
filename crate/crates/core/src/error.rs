use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("sample contains a non-finite value at index {0}")]
    NonFiniteValue(usize),

    #[error("sample mean is {0}, a Lorenz curve needs a strictly positive mean")]
    ZeroMean(f64),

    #[error("difference curve is identically zero on the grid; the coefficient is undefined (distributions indistinguishable)")]
    DegenerateCurves,

    #[error("invalid family/degree combination: {0}")]
    InvalidFamilyDegree(String),

    #[error("sampling scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("kernel was built for the {kernel} family but {requested} was requested")]
    FamilyMismatch { kernel: String, requested: String },

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("bootstrap replicate {replicate} produced a non-finite draw ({reason})")]
    NonFiniteDraw { replicate: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("probability {0} is outside the open unit interval")]
    DomainError(f64),
}
