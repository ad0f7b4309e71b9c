use thiserror::Error;

/// Errors produced by graph construction, solvers, builders and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop {0} -- {0} is not allowed")]
    SelfLoop(usize),

    #[error("duplicate vertex {0} in subset")]
    DuplicateVertex(usize),

    #[error("pair {u} -- {v} is not an edge")]
    NotAnEdge { u: usize, v: usize },

    #[error("pair {u} -- {v} is already an edge")]
    AlreadyAnEdge { u: usize, v: usize },

    #[error("pair {u} -- {v} is forbidden")]
    ForbiddenPair { u: usize, v: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("search guard `{guard}` exceeded: {actual} candidates > limit {limit}")]
    GuardExceeded {
        guard: &'static str,
        limit: u64,
        actual: u64,
    },

    #[error("structural assumption violated: {0}")]
    StructuralAssumption(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("vertex set is not a vertex cover: edge {u} -- {v} uncovered")]
    NotVertexCover { u: usize, v: usize },

    #[error("input graph is not cubic: vertex {vertex} has degree {degree}")]
    NotCubic { vertex: usize, degree: usize },

    #[error("composition inputs disagree on shared parameters: {0}")]
    HeterogeneousInstances(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
