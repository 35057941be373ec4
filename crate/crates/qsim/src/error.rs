use thiserror::Error;

pub type Result<T> = std::result::Result<T, QsimError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("qubit {0} is used twice in one layer")]
    OverlappingTargets(usize),
    #[error("support would grow to {needed}, above the bound of {bound}")]
    SupportOverflow { bound: usize, needed: usize },
    #[error("qubit {qubit} outside a {width}-qubit register")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("expected {expected} bits, got {got}")]
    Width { expected: usize, got: usize },
    #[error("block sizes sum to {sum}, but {len} bits were given")]
    PartitionMismatch { sum: usize, len: usize },
    #[error("preimage bit {bit} needs {needed} copies, the plan provides {have}")]
    FanoutInsufficient { bit: usize, needed: usize, have: usize },
    #[error("remaining qubits are entangled with the discarded ones")]
    Entangled,
    #[error("ancilla is outside span{{|0..0>, |1..1>}}")]
    IllegalAncilla,
    #[error("committed image has no claw (degenerate round)")]
    Degenerate,
    #[error(transparent)]
    Core(#[from] dpoq_core::Error),
}
