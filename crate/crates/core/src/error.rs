use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapeError {
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("flat buffer of length {len} cannot be split into rows of width {dim}")]
    FlatLength { dim: usize, len: usize },
    #[error("expected {expected_n} x {expected_dim} matrix, got {n} x {dim}")]
    Mismatch {
        expected_n: usize,
        expected_dim: usize,
        n: usize,
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge ({i}, {j}) references a node outside 0..{n}")]
    OutOfRange { i: usize, j: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormationError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("desired distance for edge {edge} is {value}; must be finite and > 0")]
    NonPositiveDistance { edge: usize, value: f64 },
    #[error("expected {expected} desired distances, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("graph has no edges")]
    NoEdges,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("{name} must be > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("sigma[{agent}] = {value} outside (0, {upper})")]
    SigmaOutOfRange {
        agent: usize,
        value: f64,
        upper: f64,
    },
    #[error("threshold constant A[{agent}][{dim}] = {value} must be > 0")]
    ThresholdConstant {
        agent: usize,
        dim: usize,
        value: f64,
    },
    #[error("sigma has {found} entries, expected {expected}")]
    SigmaLength { expected: usize, found: usize },
    #[error("a-rule fraction {0} outside (0, 1)")]
    ARuleFraction(f64),
    #[error("a_{agent} = {value} violates 0 < a_i < 1/sum|D_ij| = {upper}")]
    AOutOfRange {
        agent: usize,
        value: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Formation(#[from] FormationError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("state diverged at step {step} (t = {time} s): non-finite value for agent {agent}")]
    Divergence {
        step: usize,
        time: f64,
        agent: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("agent {0} has no neighbours; formation error undefined")]
    IsolatedAgent(usize),
    #[error("cannot compare runs: {0}")]
    Mismatch(String),
}
