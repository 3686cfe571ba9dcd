use std::fmt;

use thiserror::Error;

use crate::model::Violation;

/// A position-tagged syntax error from one of the text formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Syntax(#[from] ParseError),
    #[error("{0}")]
    Structure(String),
    #[error("duplicate operation `{0}`")]
    DuplicateOperation(String),
    #[error("invalid configuration: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("path enumeration exceeded the cap of {cap} paths")]
    ResourceCap { cap: usize },
    #[error("malformed automaton: {0}")]
    Automaton(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
