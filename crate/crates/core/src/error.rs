use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = WasoError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WasoError {
    #[error("node {0} is not part of the graph")]
    InvalidMember(NodeId),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The start node's connected component cannot hold a group of size k.
    #[error("start node {start} lies in a component of {component} nodes, fewer than k = {k}")]
    InfeasibleStart {
        start: NodeId,
        component: usize,
        k: usize,
    },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("host {0} has no neighbours to invite")]
    EmptyCandidates(NodeId),

    /// Exhaustive search or model export refused because the instance is too large.
    #[error("refusing to run at this scale: {0}")]
    ScaleGuard(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl WasoError {
    /// Stable machine-readable code, used by the service error body and CLI exit messages.
    pub fn code(&self) -> &'static str {
        match self {
            WasoError::InvalidMember(_) => "invalid_member",
            WasoError::InvalidArgument(_) => "invalid_argument",
            WasoError::InfeasibleStart { .. } => "infeasible_start",
            WasoError::Infeasible(_) => "infeasible",
            WasoError::EmptyCandidates(_) => "empty_candidates",
            WasoError::ScaleGuard(_) => "scale_guard",
            WasoError::LengthMismatch { .. } => "length_mismatch",
            WasoError::Parse { .. } => "parse_error",
            WasoError::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for WasoError {
    fn from(e: std::io::Error) -> Self {
        WasoError::Io(e.to_string())
    }
}
