use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeoError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("focal point at r = {r}: differential has a kernel of dimension {kernel_dim}")]
    FocalPoint { r: f64, kernel_dim: usize },

    #[error("focal radius r = {r}: the tube is not an immersed hypersurface")]
    FocalRadius { r: f64 },

    #[error("coincident principal curvatures: {0}")]
    CoincidentEigenvalues(String),

    #[error("the classification for n = {n} is an open case")]
    OpenCase { n: usize },
}

impl GeoError {
    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(GeoError::DimensionMismatch { expected, actual })
        }
    }
}
