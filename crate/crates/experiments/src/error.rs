use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] peqml_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Data { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("optimisation failed: {0}")]
    Optimization(String),
    #[error("could not build a thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;
