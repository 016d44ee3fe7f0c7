//! Error types for the pipeline stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-manifold edge ({v0}, {v1}): {quads} incident quads")]
    NonManifold { v0: usize, v1: usize, quads: usize },
    #[error("face with {arity} vertices is not a quad")]
    NonQuad { arity: usize },
    #[error("quads incident to edge ({v0}, {v1}) have inconsistent orientation")]
    Orientation { v0: usize, v1: usize },
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("no trace seeds: mesh is fully regular and closed")]
    NoSeeds,
    #[error("T-mesh patch is not a quadrilateral: {0}")]
    NonQuadPatch(String),
    #[error("invalid trace parameter: {0}")]
    InvalidParam(String),
}

#[derive(Debug, Error)]
pub enum IlpError {
    #[error("model is infeasible")]
    Infeasible,
    #[error("brute force state space too large: {states:e} states")]
    TooLarge { states: f64 },
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("merge would collapse a positive-area patch: {0}")]
    TopologyCollapse(String),
    #[error("no embeddable path between centers {a} and {b}")]
    DisconnectedPath { a: usize, b: usize },
}

#[derive(Debug, Error)]
pub enum HighOrderError {
    #[error("edge {edge} has a degenerate embedded polyline")]
    DegenerateEdge { edge: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Top-level error carrying the pipeline phase where it occurred.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("tracing: {0}")]
    Trace(#[from] TraceError),
    #[error("quantization: {0}")]
    Ilp(#[from] IlpError),
    #[error("extraction: {0}")]
    Extract(#[from] ExtractError),
    #[error("high-order: {0}")]
    HighOrder(#[from] HighOrderError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
