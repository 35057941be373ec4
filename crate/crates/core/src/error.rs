use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: reference to undefined wire `{name}`")]
    UndefinedWire { line: usize, name: String },
    #[error("line {line}: {gate} takes {expected} input(s), got {got}")]
    Arity {
        line: usize,
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{what} exceeds the bound of {bound}")]
    Bound { what: String, bound: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("malformed branching program: {0}")]
    MalformedBp(String),
    #[error("encoding is not consistent with the given input: {0}")]
    Inconsistent(String),
    #[error("input {0} is outside the legal domain")]
    Domain(u64),
    #[error("value {0} is not in the image")]
    NotInImage(u64),
    #[error("invalid key: {0}")]
    InvalidKey(String),
}
