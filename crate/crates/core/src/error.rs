use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample too small: n = {n}, need n >= {min_n}")]
    SampleTooSmall { n: u64, min_n: u64 },

    #[error(
        "quadrature did not converge within {subdivisions} subdivisions \
         (partial estimate {estimate}, error estimate {error_estimate:e})"
    )]
    Quadrature {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("expected a {expected} dataset")]
    WrongSetting { expected: &'static str },

    #[error("degenerate population: {0}")]
    DegeneratePopulation(String),

    #[error("rejection sampler gave up after {0} consecutive rejections")]
    RejectionExhausted(usize),

    #[error("all {0} training restarts diverged")]
    AllRestartsDiverged(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
