use thiserror::Error;

pub type Result<T> = std::result::Result<T, ProtocolError>;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("expected {expected}, received {got}")]
    Order { expected: String, got: String },
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("frame parse error at byte {offset}: {msg}")]
    Frame { offset: usize, msg: String },
    #[error("unsupported frame version {0}")]
    Version(u64),
    #[error("frame of {0} bytes exceeds the line limit")]
    Oversize(usize),
    #[error("sequence number {got} does not follow {last}")]
    Sequence { last: u64, got: u64 },
    #[error("frame belongs to session `{got}`, expected `{expected}`")]
    Session { expected: String, got: String },
    #[error("peer closed the connection")]
    Closed,
    #[error("timed out waiting for the peer")]
    Timeout,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("session aborted: {0}")]
    Aborted(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty scoreboard")]
    EmptyScoreboard,
    #[error(transparent)]
    Sim(#[from] dpoq_qsim::QsimError),
    #[error(transparent)]
    Core(#[from] dpoq_core::Error),
}
