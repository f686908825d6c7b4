use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight exponent must exceed -1, got {0}")]
    InvalidAlpha(f64),
    #[error("invalid interval [{lo}, {hi}]: need 0 <= lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("level {level} is finer than the base resolution {n_max}")]
    LevelTooFine { level: i32, n_max: i32 },
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("box has zero mass in the half space")]
    ZeroMass,
    #[error("empty box family")]
    EmptyFamily,
    #[error("grid error: {0}")]
    Grid(String),
    #[error("coefficients are not elliptic: quadratic form minimum {0}")]
    NotElliptic(f64),
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("zero denominator with nonzero numerator {0}")]
    ZeroDenominator(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
