use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the treecode library.
#[derive(Debug, Error)]
pub enum TreecodeError {
    /// Two evaluation points coincide where a kernel is singular.
    #[error("coincident points: kernel is singular at {0:?}")]
    CoincidentPoints([f64; 3]),

    /// Two distinct particles share a position.
    #[error("particles {first} and {second} share the position {position:?}")]
    DuplicateParticles {
        first: usize,
        second: usize,
        position: [f64; 3],
    },

    #[error("invalid particle set: {0}")]
    InvalidParticles(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A caller asked for something outside the supported range, such as a
    /// multi-index beyond the coefficient table.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: line {line}: {message}", path = path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, TreecodeError>;
