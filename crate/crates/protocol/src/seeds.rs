//! Seed derivation.
//!
//! A 64-bit master seed expands through `derive(parent, label)`, a keyed
//! splitmix64 step:
//!
//! ```text
//! session   = derive(master, session_index)
//! verifier  = derive(session, VERIFIER)      prover = derive(session, PROVER)
//! key       = derive(verifier, KEY)
//! round r   = derive(derive(role, ROUNDS), r)
//! step k    = derive(round r, k)              (one per measurement episode)
//! ```
//!
//! Every generator is a `ChaCha8Rng` seeded with the derived value, so any
//! round can be replayed in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const VERIFIER: u64 = 1;
pub const PROVER: u64 = 2;
pub const KEY: u64 = 3;
pub const ROUNDS: u64 = 4;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(parent: u64, label: u64) -> u64 {
    splitmix64(parent ^ splitmix64(label))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionSeeds {
    pub session: u64,
}

impl SessionSeeds {
    pub fn new(master: u64, session_index: u64) -> Self {
        SessionSeeds {
            session: derive(master, session_index),
        }
    }

    pub fn role(&self, role: u64) -> u64 {
        derive(self.session, role)
    }

    pub fn key_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive(self.role(VERIFIER), KEY))
    }

    pub fn round(&self, role: u64, round: usize) -> u64 {
        derive(derive(self.role(role), ROUNDS), round as u64)
    }

    pub fn step_rng(&self, role: u64, round: usize, step: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive(self.round(role, round), step))
    }
}
