use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative density {value} at cell {index}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("total masses differ: {a} vs {b}")]
    MassMismatch { a: f64, b: f64 },
    #[error("exact solver handles at most {max} cells, got {cells}")]
    TooLarge { cells: usize, max: usize },
    #[error("point ({0}, {1}) lies outside the unit square")]
    OutOfDomain(f64, f64),
    #[error("measurement row {0} touches no signal cell")]
    EmptyPath(usize),
    #[error("parameter {value} outside [0, 1]")]
    ThetaOutOfRange { value: f64 },
    #[error("normal matrix is numerically singular")]
    SingularSystem,
    #[error("inner solve stalled after {iterations} iterations (relative residual {residual:e})")]
    InnerSolveFailure { iterations: usize, residual: f64 },
    #[error("signal is identically zero")]
    ZeroSignal,
    #[error("contrast needs non-negative values with a positive sum")]
    NonPositiveValue,
    #[error("resolution {resolution} is not a multiple of 2^{level}")]
    ResolutionMismatch { resolution: usize, level: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
