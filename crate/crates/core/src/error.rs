use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes that do not line up for the named operation.
    #[error("{op}: shape mismatch: {detail}")]
    Shape { op: String, detail: String },

    /// An invalid architecture, grid, split or pipeline configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Input data that does not match the expected table schema.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty batch passed to {0}")]
    EmptyBatch(&'static str),

    /// Training produced a non-finite loss.
    #[error("training diverged for {config} at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged {
        config: String,
        epoch: usize,
        batch: usize,
        loss: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn shape(op: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Shape {
            op: op.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Csv(e) if e.is_io_error() => 2,
            _ => 3,
        }
    }
}
