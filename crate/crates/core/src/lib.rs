//! Classical core of a constant-depth proof-of-quantumness pipeline.
//!
//! Boolean circuits compile to mod-2 branching programs (directly through
//! their algebraic normal form, or through Barrington's width-5 construction),
//! which are garbled into a perfect randomized encoding of output locality 4.
//! Desk-scale trapdoor claw-free functions sit on top of the encoding.

pub mod anf;
pub mod barrington;
pub mod bits;
pub mod bp;
pub mod circuits;
pub mod error;
pub mod gf2;
pub mod randenc;
pub mod tcf;

pub use bits::BitVec;
pub use error::{Error, Result};
