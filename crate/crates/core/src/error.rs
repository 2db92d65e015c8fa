use thiserror::Error;

/// Errors raised by grid construction, transforms and the experiment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular multiplier: {0}")]
    Singularity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot fit tail constants: {0}")]
    Unfittable(String),

    #[error("split did not reach target {target:e}: best achieved {best:e} (sigma={sigma:e}, radius={radius})")]
    SplitFailed {
        target: f64,
        best: f64,
        sigma: f64,
        radius: f64,
    },

    #[error("malformed data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
