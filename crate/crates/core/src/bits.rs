//! Packed bit vectors.
//!
//! Bit `i` of a [`BitVec`] built from an integer is bit `i` of that integer
//! (least significant first). The hex form follows the same convention: byte
//! `k` of the hex string carries bits `8k..8k+8`, lowest bit first.

use std::fmt;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_tail();
        v
    }

    pub fn with_capacity(len: usize) -> Self {
        BitVec {
            len: 0,
            words: Vec::with_capacity(words_for(len)),
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Low `len` bits of `value`, least significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 takes at most 64 bits");
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { value } else { value & ((1u64 << len) - 1) };
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = BitVec {
            len,
            words: (0..words_for(len)).map(|_| rng.gen()).collect(),
        };
        v.clear_tail();
        v
    }

    /// Parses a string of `0`/`1` characters, first character is bit 0.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let mut v = BitVec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => v.push(false),
                '1' => v.push(true),
                _ => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("invalid bit character {c:?} at offset {i}"),
                    })
                }
            }
        }
        Ok(v)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i & 63);
        if b {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn push(&mut self, b: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        let i = self.len - 1;
        self.set(i, b);
    }

    pub fn extend_from(&mut self, other: &BitVec) {
        if self.len % 64 == 0 {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(parts: &[&BitVec]) -> BitVec {
        let total = parts.iter().map(|p| p.len()).sum();
        let mut out = BitVec::with_capacity(total);
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    pub fn slice(&self, range: Range<usize>) -> BitVec {
        assert!(range.end <= self.len, "slice out of range");
        let mut out = BitVec::zeros(range.len());
        if range.start % 64 == 0 {
            let w0 = range.start / 64;
            let n = out.words.len();
            out.words.copy_from_slice(&self.words[w0..w0 + n]);
            out.clear_tail();
            return out;
        }
        for (k, i) in range.enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 on a {}-bit vector", self.len);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal lengths");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones() & 1;
        }
        acc == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn parity(&self) -> bool {
        self.words.iter().fold(0u32, |acc, w| acc ^ (w.count_ones() & 1)) == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn hamming(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn ones_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_hex(&self) -> String {
        let nbytes = self.len.div_ceil(8);
        let mut s = String::with_capacity(nbytes * 2);
        for k in 0..nbytes {
            let byte = (self.words[k / 8] >> ((k % 8) * 8)) as u8;
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let hex = hex.trim();
        if hex.len() != len.div_ceil(8) * 2 {
            return Err(Error::Parse {
                line: 0,
                msg: format!(
                    "hex field has {} digits, expected {} for {len} bits",
                    hex.len(),
                    len.div_ceil(8) * 2
                ),
            });
        }
        let mut v = BitVec::zeros(len);
        for k in 0..len.div_ceil(8) {
            let byte = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).map_err(|_| Error::Parse {
                line: 0,
                msg: format!("bad hex digit near offset {}", 2 * k),
            })?;
            v.words[k / 8] |= (byte as u64) << ((k % 8) * 8);
        }
        let before = v.clone();
        v.clear_tail();
        if v != before {
            return Err(Error::Parse {
                line: 0,
                msg: "hex field has bits set beyond its declared length".into(),
            });
        }
        Ok(v)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromIterator<bool> for BitVec {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut v = BitVec::default();
        for b in iter {
            v.push(b);
        }
        v
    }
}

/// Wire form of a bit field: explicit length plus hex digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexBits {
    pub len: usize,
    pub hex: String,
}

impl From<&BitVec> for HexBits {
    fn from(v: &BitVec) -> Self {
        HexBits {
            len: v.len(),
            hex: v.to_hex(),
        }
    }
}

impl TryFrom<&HexBits> for BitVec {
    type Error = Error;
    fn try_from(h: &HexBits) -> Result<Self> {
        BitVec::from_hex(&h.hex, h.len)
    }
}

impl Serialize for BitVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HexBits::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h = HexBits::deserialize(d)?;
        BitVec::try_from(&h).map_err(serde::de::Error::custom)
    }
}
