use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("radial functions live on different grids")]
    GridMismatch,
    #[error("grid calibration failed at t = {t}: relative error {error:e} exceeds {tolerance:e}")]
    Calibration { t: f64, error: f64, tolerance: f64 },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_) | Error::Calibration { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
