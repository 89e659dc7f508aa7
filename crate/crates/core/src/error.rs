use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop on node {0}")]
    SelfLoop(String),
    #[error("edge {0} -- {1} has non-positive weight {2}")]
    NonPositiveWeight(String, String, f64),
    #[error("duplicate node {0}")]
    DuplicateNode(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("edge {0} -- {1} is not in the graph")]
    UnknownEdge(String, String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("expected a bipartition, got {0} parts")]
    NotBipartition(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("{0} did not converge after {1} iterations")]
    NoConvergence(&'static str, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("need at least {need} nodes, got {got}")]
    TooSmall { need: usize, got: usize },
    #[error("size {got} exceeds the limit of {limit}")]
    TooLarge { limit: usize, got: usize },
    #[error("matrix is singular to working precision")]
    Singular,

    #[error("species graphs do not share the same patch set")]
    PatchSetMismatch,
    #[error("dispersal graph of species {} is disconnected", .0 + 1)]
    DisconnectedSpeciesGraph(usize),
    #[error("operation needs at least two patches")]
    SinglePatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("state is not an equilibrium (residual {0:e})")]
    NotEquilibrium(f64),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
