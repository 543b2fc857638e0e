use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("device catalog is empty")]
    EmptyCatalog,
    #[error("device `{id}`: {field} {reason}")]
    InvalidDevice {
        id: String,
        field: String,
        reason: String,
    },
    #[error("control loop: {0}")]
    InvalidLoop(String),
    #[error("instance: {0}")]
    InvalidInstance(String),
    #[error("unknown node index {0}")]
    UnknownNode(NodeId),
    #[error("architecture: {0}")]
    InvalidArchitecture(String),
    #[error("parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
}

/// Failure to read or interpret an input document.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

impl ParseError {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ParseError::Field {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("identical-loop mode requires all loops to be identical")]
    NonIdenticalLoops,
}
