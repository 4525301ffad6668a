//! Error type shared across the pipeline.
//!
//! Errors carry the category that determines the process exit code:
//! configuration problems exit with 2, data problems with 3, and numerical
//! failures with 4.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad run configuration: invalid hyperparameters, missing files,
    /// malformed flags. Exit code 2.
    #[error("config error: {0}")]
    Config(String),

    /// Bad input data: malformed CSV, inconsistent tables, out-of-range
    /// values. Exit code 3.
    #[error("data error: {0}")]
    Data(String),

    /// Numerical failure: non-finite values where finite ones are required,
    /// degenerate matrices, failed preconditions of a kernel. Exit code 4.
    #[error("numerical error: {0}")]
    Numerics(String),
}

impl Error {
    /// Process exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) => 3,
            Error::Numerics(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Data(format!("io: {e}"))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(format!("csv: {e}"))
    }
}
