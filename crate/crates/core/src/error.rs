use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the optimization stack.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or parameter lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An experiment, prior or optimizer configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A matrix factorization or optimizer failed numerically.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The objective returned a non-finite value during a phase that cannot absorb it.
    #[error("objective returned non-finite value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    /// Every repetition of an experiment failed.
    #[error("runtime failure: {0}")]
    Runtime(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
