use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrices must have at least one row and one column")]
    EmptyMatrix,

    #[error("entry count {got} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },

    #[error("vector has an eps entry at index {0}")]
    NonFinite(usize),

    #[error("matrix is not regular: row {0} has no finite entry")]
    NotRegular(usize),

    #[error("precedence graph has no circuit")]
    NoCircuit,

    #[error("node {0} is not reachable from any circuit")]
    NoUpstreamCircuit(usize),

    #[error("no transient found within bound {0}")]
    BoundExceeded(usize),

    #[error("cyclicity is unknown for this matrix and must be supplied")]
    MissingCyclicity,

    #[error("initial set is unsatisfiable")]
    UnsatisfiableInitialSet,

    #[error("empty coefficient rows")]
    EmptyRow,

    #[error("formula is not in negation normal form")]
    NotNnf,

    #[error("variable x{} is missing from the model", .0 + 1)]
    MissingVariable(usize),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("external solver: {0}")]
    External(String),

    #[error("methods disagree: {0}")]
    Disagreement(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
