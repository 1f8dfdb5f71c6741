use thiserror::Error;

/// Errors raised by grid construction, projections, solvers and IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("interval out of range: {0}")]
    OutOfRange(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("signal is not bandlimited: relative out-of-band norm {residual:e} exceeds {tolerance:e}")]
    NotBandlimited { residual: f64, tolerance: f64 },

    #[error("power iteration did not converge after {iterations} iterations (rayleigh quotient {rayleigh}, gap estimate {gap_estimate})")]
    NoConvergence {
        iterations: usize,
        rayleigh: f64,
        gap_estimate: f64,
    },

    #[error("ill-conditioned system: condition number {condition:e} exceeds {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("refused: {0}")]
    Refused(String),

    #[error("rank-deficient design; unresolved pairs {pairs:?}")]
    RankDeficient { pairs: Vec<((usize, usize), (usize, usize))> },

    #[error("density matrix is not rank one: eigenvalues {eigenvalues:?}")]
    NotRankOne { eigenvalues: Vec<f64> },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
