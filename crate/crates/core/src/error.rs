use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A symptom event carried an out-of-range severity or certainty.
    #[error("invalid symptom event #{index}: {reason}")]
    InvalidEvent { index: usize, reason: String },

    /// A dendritic-cell report was presented to a naive cell with a different TCR.
    #[error("antigen mismatch: naive cell recognises `{expected}`, report carries `{found}`")]
    AntigenMismatch { expected: String, found: String },

    /// Th1 effectors act only inside the lymph node.
    #[error("Th1 effector for `{antigen}` cannot apply a periphery response")]
    Th1Response { antigen: String },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("horizon must be at least 1 step")]
    InvalidHorizon,

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
