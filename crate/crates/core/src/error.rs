use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("infeasible operating point: {0}")]
    InfeasibleOperatingPoint(String),
    #[error("numerical divergence at sample {index}")]
    NumericalDivergence { index: usize },
    #[error("invalid sag template: {0}")]
    InvalidTemplate(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid action chain: {0}")]
    InvalidChain(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("incompatible task library: {0}")]
    IncompatibleLibrary(String),
    #[error("task library is empty; run pre-learning to populate it first")]
    EmptyLibrary,
    #[error("task `{0}` already exists in the library")]
    TaskExists(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the forward model (infeasible initialization or
    /// divergence), as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleOperatingPoint(_) | Error::NumericalDivergence { .. }
        )
    }
}
