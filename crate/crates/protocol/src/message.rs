//! Protocol messages. Bit fields travel as `{"len": n, "hex": ".."}` with
//! bit `i` in bit `i % 8` of byte `i / 8`.

use std::fmt;
use std::str::FromStr;

use dpoq_core::tcf::TcfKey;
use dpoq_core::BitVec;
use dpoq_qsim::DepthMeter;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ProtocolError;
use crate::score::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Bcmvv,
    Kmcvy,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Bcmvv => "bcmvv",
            Protocol::Kmcvy => "kmcvy",
        })
    }
}

impl FromStr for Protocol {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bcmvv" => Ok(Protocol::Bcmvv),
            "kmcvy" => Ok(Protocol::Kmcvy),
            other => Err(ProtocolError::Config(format!("unknown protocol `{other}`"))),
        }
    }
}

/// Measurement basis angle for the Bell test: `+pi/4` or `-pi/4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phi {
    #[serde(rename = "+pi/4")]
    Plus,
    #[serde(rename = "-pi/4")]
    Minus,
}

impl Phi {
    pub fn radians(self) -> f64 {
        match self {
            Phi::Plus => std::f64::consts::FRAC_PI_4,
            Phi::Minus => -std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn from_radians(phi: f64) -> Option<Phi> {
        if (phi - std::f64::consts::FRAC_PI_4).abs() < 1e-12 {
            Some(Phi::Plus)
        } else if (phi + std::f64::consts::FRAC_PI_4).abs() < 1e-12 {
            Some(Phi::Minus)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bits(pub BitVec);

#[derive(Serialize, Deserialize)]
struct BitsRepr {
    len: usize,
    hex: String,
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BitsRepr {
            len: self.0.len(),
            hex: self.0.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = BitsRepr::deserialize(d)?;
        BitVec::from_hex(&r.hex, r.len)
            .map(Bits)
            .map_err(serde::de::Error::custom)
    }
}

impl From<BitVec> for Bits {
    fn from(v: BitVec) -> Self {
        Bits(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum Message {
    /// Verifier opens the session.
    Key {
        protocol: Protocol,
        rounds: usize,
        key: TcfKey,
    },
    Commit { round: usize, y_hat: Bits },
    /// The committed image has no claw; commit again.
    Resample { round: usize, attempt: usize },
    Challenge { round: usize, c: u8 },
    Preimage { round: usize, x_hat: Bits },
    Equation { round: usize, d: Bits },
    BellV { round: usize, v: Bits },
    BellD { round: usize, d: Bits },
    BellPhi { round: usize, phi: Phi },
    BellBit { round: usize, bit: u8 },
    Finish {},
    Meter { meter: DepthMeter },
    Verdict { report: Report },
    Abort { reason: String },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Key { .. } => "key",
            Message::Commit { .. } => "commit",
            Message::Resample { .. } => "resample",
            Message::Challenge { .. } => "challenge",
            Message::Preimage { .. } => "preimage",
            Message::Equation { .. } => "equation",
            Message::BellV { .. } => "bell_v",
            Message::BellD { .. } => "bell_d",
            Message::BellPhi { .. } => "bell_phi",
            Message::BellBit { .. } => "bell_bit",
            Message::Finish {} => "finish",
            Message::Meter { .. } => "meter",
            Message::Verdict { .. } => "verdict",
            Message::Abort { .. } => "abort",
        }
    }

    pub const KINDS: [&'static str; 14] = [
        "key", "commit", "resample", "challenge", "preimage", "equation", "bell_v", "bell_d", "bell_phi",
        "bell_bit", "finish", "meter", "verdict", "abort",
    ];

    pub fn round(&self) -> Option<usize> {
        match *self {
            Message::Commit { round, .. }
            | Message::Resample { round, .. }
            | Message::Challenge { round, .. }
            | Message::Preimage { round, .. }
            | Message::Equation { round, .. }
            | Message::BellV { round, .. }
            | Message::BellD { round, .. }
            | Message::BellPhi { round, .. }
            | Message::BellBit { round, .. } => Some(round),
            _ => None,
        }
    }
}
