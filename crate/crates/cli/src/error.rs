use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lab_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("record has schema version {found}, this build reads {expected}")]
    Schema { found: u32, expected: u32 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
