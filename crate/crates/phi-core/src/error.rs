//! Error type shared across the pipeline, with CLI exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent run configuration (exit code 2).
    #[error("config: {0}")]
    Config(String),

    /// Input data could not be read or parsed (exit code 3).
    #[error("ingest: {0}")]
    Ingest(String),

    /// A numerical routine failed or its preconditions were violated
    /// (exit code 4).
    #[error("numerical: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 0 success, 2 config error,
    /// 3 ingest error, 4 numerical failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Ingest(_) | Error::Csv(_) => 3,
            Error::Numerical(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
