use std::path::PathBuf;

use thiserror::Error;

use crate::instance::CustomerId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown customer id {0}")]
    InvalidReference(CustomerId),

    #[error("weight vector has {got} entries but the instance has {expected} customers")]
    MissingWeight { expected: usize, got: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("customer {0} has no ABC class")]
    Unclassified(CustomerId),

    #[error("customer {id} has negative score {score}")]
    NegativeScore { id: CustomerId, score: f64 },

    #[error("instance has {customers} customers, above the limit of {limit}")]
    SizeExceeded { customers: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed config: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json {
            line: err.line(),
            column: err.column(),
            message: strip_location(err.to_string()),
        }
    }
}

/// serde_json appends " at line L column C", which the variant already holds.
fn strip_location(mut msg: String) -> String {
    if let Some(at) = msg.rfind(" at line ") {
        msg.truncate(at);
    }
    msg
}
