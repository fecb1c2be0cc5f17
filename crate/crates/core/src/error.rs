use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgeError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("index out of range: {what} {index} (limit {limit})")]
    Index {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("query generation failed: {0}")]
    Generation(String),

    #[error("incompatible checkpoint: {0}")]
    Compat(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },
}

impl KgeError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        KgeError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        KgeError::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        KgeError::Config(msg.into())
    }
}

pub type Result<T, E = KgeError> = std::result::Result<T, E>;
