//! Interactive proofs of quantumness over randomized-encoded trapdoor
//! claw-free functions: verifier and prover state machines, scoring, and a
//! JSON-lines wire format.

pub mod error;
pub mod invert;
pub mod message;
pub mod prover;
pub mod score;
pub mod seeds;
pub mod session;
pub mod verifier;
pub mod wire;

pub use error::{ProtocolError, Result};
pub use message::{Message, Phi, Protocol};
pub use score::{Report, Scoreboard, Verdict};
pub use session::{run_local, SessionConfig};
