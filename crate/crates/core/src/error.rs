use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected two node tokens, found {found}")]
    Parse { line: usize, found: usize },

    #[error("edge list contains no edges")]
    EmptyGraph,

    #[error("node id {id} out of range for a graph with {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("invalid assignment: {0}")]
    Assignment(String),

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("network too small: n = {0}, at least 3 nodes are required")]
    TooSmall(usize),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("infeasible generator specification: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
