use std::io;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("plan CSV: {0}")]
    Plan(String),
    #[error("records CSV: {0}")]
    Records(String),
    #[error(transparent)]
    Core(#[from] drrt_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
