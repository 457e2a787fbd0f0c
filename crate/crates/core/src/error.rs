use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The DPP kernel does not define a valid point process for these parameters.
    #[error("DPP existence condition violated: beta = {beta} exceeds the maximal admissible beta = {max_beta}")]
    ExistenceViolation { beta: f64, max_beta: f64 },

    #[error("unsupported window: {0}")]
    UnsupportedWindow(&'static str),

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("point {index} ({x}, {y}) lies outside the observation window")]
    PointOutsideWindow { index: usize, x: f64, y: f64 },

    /// The rejection sampler met a density above its envelope. The bound has
    /// to be refitted; the draw is never silently truncated.
    #[error("rejection bound exceeded (density {density} > bound {bound}); refit the bound")]
    RejectionBoundExceeded { density: f64, bound: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
