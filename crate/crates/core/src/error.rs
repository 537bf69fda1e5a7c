use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node {node} in layer {layer}")]
    SelfLoop { line: usize, node: u64, layer: u64 },

    #[error("empty graph: no edges were read")]
    EmptyGraph,

    #[error("unknown node {0}")]
    UnknownNode(u64),

    #[error("unknown layer {0}")]
    UnknownLayer(u64),

    #[error("negative weight {weight} on line {line}")]
    NegativeWeight { line: usize, weight: f64 },

    #[error("weight file mixes per-node and broadcast lines (line {line})")]
    MixedWeightForms { line: usize },

    #[error("node {0} is not alive in this view")]
    NotAlive(NodeId),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid summarizer: {0}")]
    InvalidSummarizer(String),

    #[error("λ out of range: {value} (valid range 1..={max})")]
    LambdaOutOfRange { value: usize, max: usize },

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("empty node set")]
    EmptyNodeSet,

    #[error("lattice is incomplete (budget exhausted)")]
    IncompleteLattice,

    #[error("invalid λ set: {0}")]
    InvalidLambdaSet(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle budget exceeded: {nodes} nodes (limit {limit})")]
    OracleBudget { nodes: usize, limit: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
