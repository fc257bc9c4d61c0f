use thiserror::Error;

/// Errors produced by the loading library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("config validation failed: {0}")]
    Validation(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(
        "interference calibration did not converge after {iterations} iterations \
         (best scale {best_scale:e}, achieved {achieved_sir_db:.3} dB)"
    )]
    Calibration {
        best_scale: f64,
        achieved_sir_db: f64,
        iterations: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
