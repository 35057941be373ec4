//! Sparse state-vector simulation for the honest prover.
//!
//! States are maps from basis strings to amplitudes, so registers of
//! hundreds of qubits are cheap as long as the support stays small.

pub mod bench;
pub mod error;
pub mod eval;
pub mod ghz;
pub mod meter;
pub mod prover;
pub mod state;

pub use error::{QsimError, Result};
pub use meter::DepthMeter;
pub use prover::{Engine, ProverCircuit};
pub use state::{Gate, SparseState};
