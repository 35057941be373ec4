//! Verifier-side algebra: encoded inversion and the Bell-test bookkeeping.

use std::f64::consts::FRAC_PI_8;

use dpoq_core::randenc::EncodedFunction;
use dpoq_core::tcf::{TcfKey, TcfTrapdoor};
use dpoq_core::{BitVec, Error};
use serde::{Deserialize, Serialize};

use crate::error::{ProtocolError, Result};
use crate::message::Phi;

/// Both encoded preimages of `y_hat`, or `None` for a degenerate image.
///
/// Decodes `y_hat`, inverts the decoded value with the trapdoor and
/// reconstructs the randomness of each preimage.
pub fn encoded_invert(
    trapdoor: &TcfTrapdoor,
    key: &TcfKey,
    f: &EncodedFunction,
    y_hat: &BitVec,
) -> Result<Option<(BitVec, BitVec)>> {
    let y = f.decode(y_hat)?;
    let (x0, x1) = match trapdoor.invert(key, y) {
        Ok(c) => c,
        Err(Error::NotInImage(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let m = f.num_inputs();
    let rebuild = |x: u64| match f.reconstruct(&BitVec::from_u64(x, m), y_hat) {
        Ok(p) => Ok(Some(p)),
        Err(Error::Inconsistent(_)) => Ok(None),
        Err(e) => Err(ProtocolError::from(e)),
    };
    match (rebuild(x0)?, rebuild(x1)?) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        _ => Ok(None),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    Zero,
    One,
    Plus,
    Minus,
}

pub fn bell_gamma(x0: &BitVec, x1: &BitVec, v: &BitVec, d: &BitVec) -> Gamma {
    let (a, b) = (v.dot(x0), v.dot(x1));
    if a == b {
        if a {
            Gamma::One
        } else {
            Gamma::Zero
        }
    } else if d.dot(&x0.xor(x1)) {
        Gamma::Minus
    } else {
        Gamma::Plus
    }
}

/// `(gamma, phi) -> outcome` with Born probability `cos^2(pi/8)`.
pub const LIKELY_BIT: [(Gamma, Phi, u8); 8] = [
    (Gamma::Zero, Phi::Plus, 0),
    (Gamma::Zero, Phi::Minus, 0),
    (Gamma::One, Phi::Plus, 1),
    (Gamma::One, Phi::Minus, 1),
    (Gamma::Plus, Phi::Plus, 0),
    (Gamma::Plus, Phi::Minus, 1),
    (Gamma::Minus, Phi::Plus, 1),
    (Gamma::Minus, Phi::Minus, 0),
];

pub fn likely_bit(gamma: Gamma, phi: Phi) -> u8 {
    LIKELY_BIT
        .iter()
        .find(|(g, p, _)| *g == gamma && *p == phi)
        .map(|e| e.2)
        .expect("table is total")
}

pub fn bell_success_probability() -> f64 {
    FRAC_PI_8.cos().powi(2)
}
