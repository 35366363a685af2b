use crate::graph::{EdgeId, VertexId};
use crate::rational::Q;
use std::collections::BTreeMap;

/// Crate-wide error type. Variant names follow the domain vocabulary so the
/// CLI can surface them verbatim.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("edge {0} has no length")]
    MissingLength(EdgeId),
    #[error("edge {edge} has non-positive length {length}")]
    NonPositiveLength { edge: EdgeId, length: Q },
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has cusps where none are allowed")]
    CuspsPresent,
    #[error("vertex {vertex} has valency {valency}, need at least {required}")]
    ValencyTooLow {
        vertex: VertexId,
        valency: usize,
        required: usize,
    },
    #[error("loop enumeration exceeded cap of {0}")]
    LoopCapExceeded(usize),
    #[error("not a simple loop: {0}")]
    InvalidLoop(String),
    #[error("not a simple path: {0}")]
    InvalidPath(String),
    #[error("concatenation requires a valency-2 vertex, found valency {0}")]
    BadConcatenation(usize),
    #[error("cannot contract a disconnected subgraph")]
    ContractDisconnected,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("valuation must be nonnegative, got {0}")]
    NegativeValuation(Q),
    #[error("good reduction: valuation {0} gives no edge")]
    NoEdge(Q),
    #[error("nothing to distinguish: equal valuations {0}")]
    EqualValuations(Q),
    #[error("interval is empty")]
    EmptyInterval,
    #[error("expected integer valuations with 0 < v_alpha < v_beta, got {0} and {1}")]
    BadWitnessPair(Q, Q),
    #[error("vertex {0} lies on the window boundary")]
    BoundaryVertex(VertexId),
    #[error("window is not a tree")]
    NotATree,
    #[error("marked line is invalid: {0}")]
    InvalidLine(String),
    #[error("metric ball of radius {radius} around {vertex} exits the window")]
    BallExitsWindow { vertex: VertexId, radius: Q },
    #[error("translate image leaves the window at interior vertex {0}")]
    TranslateEscapesWindow(VertexId),
    #[error("window map is not a partial isometry: {0}")]
    InvalidWindowMap(String),
    #[error("window depth {0} is too small to contain the first period")]
    DepthTooSmall(Q),
    #[error("splitting still holds at e_max = {0}; window too shallow")]
    EMaxReached(u32),
    #[error("i_max = {0} leaves no usable index")]
    IMaxTooSmall(usize),
    #[error("no rational with denominator <= {denom_bound} in ({lo}, {hi})")]
    NoCandidate { denom_bound: u64, lo: Q, hi: Q },
    #[error("ambiguous: {count} candidates with denominator <= {denom_bound} in ({lo}, {hi})")]
    Ambiguous {
        denom_bound: u64,
        lo: Q,
        hi: Q,
        count: usize,
    },
    #[error("constraint system is rank deficient: rank {rank} < {edges} edges")]
    RankDeficient {
        rank: usize,
        edges: usize,
        null_space: Vec<BTreeMap<EdgeId, Q>>,
    },
    #[error("constraint system is inconsistent at row {row}: residual {residual}")]
    Inconsistent { row: usize, residual: Q },
    #[error("row {0} is missing a right-hand side")]
    MissingRhs(usize),
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("invalid graph file: {0}")]
    BadGraphFile(String),
    #[error("{0}")]
    Other(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
