use thiserror::Error;

use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("vertex `{0}` has no predecessors (a decider has no vote)")]
    NoPredecessors(String),
    #[error("empty predecessor set (a decider has no vote)")]
    EmptyVote,
    #[error("vertex sets overlap at `{0}`")]
    OverlappingSets(String),
    #[error("spin assignment does not match its vertex set: {0}")]
    AssignmentMismatch(String),
    #[error("enumeration infeasible: {free} free spins exceed the cap of {cap}")]
    EnumerationInfeasible { free: usize, cap: usize },
    #[error("{0}: graph contains a directed cycle")]
    Cyclic(&'static str),
    #[error("non-tree multi-edge between `{0}` and `{1}`")]
    MultiEdge(String, String),
    #[error("degenerate influence on executive `{executive}`: 2P(all +1) - 1 = {gap:e}")]
    DegenerateInfluence { executive: String, gap: f64 },
    #[error("outside classified scope: {0}")]
    OutsideScope(String),
    #[error("on a tipping line the value is not unique (one-sided values {lower} and {upper})")]
    BoundaryValue { lower: f64, upper: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
