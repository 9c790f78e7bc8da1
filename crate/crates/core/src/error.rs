//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: I/O and format
//! problems are data errors (exit 2), `Numeric` aborts a training run (exit 3).

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A line in a line-delimited input could not be parsed.
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Semantically invalid data: dangling ids, duplicate records, bad labels.
    #[error("{0}")]
    Data(String),

    /// Dimension or shape mismatch between tensors, graphs, or histograms.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Non-finite values encountered during optimization.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A pipeline stage failed; carries the stage name for CLI reporting.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Error::Data(message.into())
    }

    pub fn shape(message: impl Into<String>) -> Self {
        Error::Shape(message.into())
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Error::Numeric(message.into())
    }

    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True when this (or the wrapped source) is a numeric failure.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric(_) => true,
            Error::Stage { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
