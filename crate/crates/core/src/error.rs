use thiserror::Error;

pub type Result<T> = std::result::Result<T, SvddError>;

#[derive(Debug, Error)]
pub enum SvddError {
    /// Malformed caller input: dimension mismatch, index out of range, empty data.
    #[error("input error: {0}")]
    Input(String),
    /// Parameters that cannot describe a valid problem (e.g. `n·C < 1`).
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("model load error: {0}")]
    Load(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SvddError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        SvddError::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SvddError::Config(msg.into())
    }
}
