use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gate placement: qubits ({i}, {j}) on {n} qubits")]
    InvalidPlacement { i: usize, j: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid group data: {0}")]
    InvalidGroupData(String),

    #[error("unknown or invalid label: {0}")]
    Label(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("depth error: {0}")]
    Depth(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("certification failed for label {label}: success {success:.6} below delta {delta}")]
    Certification { label: usize, success: f64, delta: f64 },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
