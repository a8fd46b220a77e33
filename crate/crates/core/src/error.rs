use thiserror::Error;

use crate::roadmap::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("tree is not a subgraph of the base graph: edge ({0}, {1}) missing")]
    NotASubgraph(VertexId, VertexId),
    #[error("agent {agent}: goal {goal} unreachable from start {start}")]
    Unreachable {
        agent: usize,
        start: VertexId,
        goal: VertexId,
    },
    #[error("agent {0}: empty corridor")]
    EmptyCorridor(usize),
    #[error("configuration length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
