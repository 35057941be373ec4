//! Desk-scale 2-to-1 trapdoor function families.
//!
//! * Rabin: `x -> x^2 mod N` on units `0 < x < N/2`, with `N = p q` and
//!   `p, q = 3 (mod 4)`. Inputs are `bitlen((N-1)/2)`-bit strings, outputs
//!   `bitlen(N-1)` bits. Strings outside the legal domain map to the reserved
//!   all-ones output so the function is total.
//! * Toy: `z -> perm(min(z, z ^ s))` on `m`-bit strings. It is a perfect
//!   2-to-1 function with a trapdoor but has no cryptographic hardness.
//!
//! Claw-freeness and hardness are asymptotic notions and are not tested.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anf::{truth_table_anf, AnfPolynomial, MAX_ANF_VARS};
use crate::error::{Error, Result};

pub const MIN_PRIME_BITS: u32 = 3;
pub const MAX_PRIME_BITS: u32 = 16;
pub const MAX_TOY_BITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rabin,
    Toy,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rabin" => Ok(Family::Rabin),
            "toy" => Ok(Family::Toy),
            other => Err(Error::InvalidKey(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum TcfKey {
    Rabin {
        #[serde(rename = "N")]
        n: u64,
    },
    /// `perm` is a bijection on `m`-bit strings; `table[z] = perm[min(z, z ^ s)]`
    /// is the public evaluation table.
    Toy {
        m: usize,
        perm: Vec<u64>,
        table: Vec<u64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TcfTrapdoor {
    Rabin { p: u64, q: u64 },
    Toy { s: u64 },
}

fn bitlen(v: u64) -> usize {
    (64 - v.leading_zeros()) as usize
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (m as i64, (a % m) as i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(m as i64) as u64
}

/// Square root of a quadratic residue `y` modulo a prime `p = 3 (mod 4)`.
pub fn sqrt_mod_prime(y: u64, p: u64) -> Option<u64> {
    let a = pow_mod(y, (p + 1) / 4, p);
    (a * a % p == y % p).then_some(a)
}

impl TcfKey {
    pub fn family(&self) -> Family {
        match self {
            TcfKey::Rabin { .. } => Family::Rabin,
            TcfKey::Toy { .. } => Family::Toy,
        }
    }

    pub fn rabin_from_primes(p: u64, q: u64) -> Result<(TcfKey, TcfTrapdoor)> {
        for r in [p, q] {
            if !is_prime(r) || r % 4 != 3 {
                return Err(Error::InvalidKey(format!("{r} is not a prime = 3 mod 4")));
            }
        }
        if p == q {
            return Err(Error::InvalidKey("primes must be distinct".into()));
        }
        if p.max(q) >= 1 << MAX_PRIME_BITS {
            return Err(Error::Bound {
                what: "prime size".into(),
                bound: MAX_PRIME_BITS as usize,
            });
        }
        let (p, q) = (p.min(q), p.max(q));
        Ok((TcfKey::Rabin { n: p * q }, TcfTrapdoor::Rabin { p, q }))
    }

    pub fn toy_from_parts(m: usize, perm: Vec<u64>, s: u64) -> Result<(TcfKey, TcfTrapdoor)> {
        if m == 0 || m > MAX_TOY_BITS {
            return Err(Error::Bound {
                what: format!("toy width {m}"),
                bound: MAX_TOY_BITS,
            });
        }
        let size = 1usize << m;
        if s == 0 || s as usize >= size {
            return Err(Error::InvalidKey("mask must be a nonzero m-bit string".into()));
        }
        let mut seen = vec![false; size];
        if perm.len() != size {
            return Err(Error::InvalidKey("permutation table has the wrong size".into()));
        }
        for &v in &perm {
            if v as usize >= size || std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::InvalidKey("permutation table is not a bijection".into()));
            }
        }
        let table = (0..size as u64).map(|z| perm[z.min(z ^ s) as usize]).collect();
        Ok((TcfKey::Toy { m, perm, table }, TcfTrapdoor::Toy { s }))
    }

    /// Generates a key. `size` is the prime bit length for Rabin (primes are
    /// drawn from `[3, 2^size)`) and the input width for the toy family.
    pub fn gen<R: Rng + ?Sized>(family: Family, size: usize, rng: &mut R) -> Result<(TcfKey, TcfTrapdoor)> {
        match family {
            Family::Rabin => {
                if !(MIN_PRIME_BITS as usize..=MAX_PRIME_BITS as usize).contains(&size) {
                    return Err(Error::Bound {
                        what: format!("{size}-bit primes"),
                        bound: MAX_PRIME_BITS as usize,
                    });
                }
                let primes: Vec<u64> = (3..1u64 << size).filter(|&v| v % 4 == 3 && is_prime(v)).collect();
                let chosen: Vec<u64> = primes.choose_multiple(rng, 2).copied().collect();
                TcfKey::rabin_from_primes(chosen[0], chosen[1])
            }
            Family::Toy => {
                if size == 0 || size > MAX_TOY_BITS {
                    return Err(Error::Bound {
                        what: format!("toy width {size}"),
                        bound: MAX_TOY_BITS,
                    });
                }
                let mut perm: Vec<u64> = (0..1u64 << size).collect();
                perm.shuffle(rng);
                let s = rng.gen_range(1..1u64 << size);
                TcfKey::toy_from_parts(size, perm, s)
            }
        }
    }

    /// Width of input bit-strings.
    pub fn input_bits(&self) -> usize {
        match self {
            TcfKey::Rabin { n } => bitlen((n - 1) / 2),
            TcfKey::Toy { m, .. } => *m,
        }
    }

    pub fn output_bits(&self) -> usize {
        match self {
            TcfKey::Rabin { n } => bitlen(n - 1),
            TcfKey::Toy { m, .. } => *m,
        }
    }

    /// Image assigned to illegal inputs (Rabin only; never a legal image).
    pub fn reserved_image(&self) -> Option<u64> {
        match self {
            TcfKey::Rabin { .. } => Some((1u64 << self.output_bits()) - 1),
            TcfKey::Toy { .. } => None,
        }
    }

    pub fn is_legal(&self, x: u64) -> bool {
        match self {
            TcfKey::Rabin { n } => x > 0 && 2 * x < *n && gcd(x, *n) == 1,
            TcfKey::Toy { m, .. } => x < 1 << m,
        }
    }

    pub fn eval(&self, x: u64) -> Result<u64> {
        if !self.is_legal(x) {
            return Err(Error::Domain(x));
        }
        Ok(match self {
            TcfKey::Rabin { n } => x * x % n,
            TcfKey::Toy { table, .. } => table[x as usize],
        })
    }

    /// Total function on `input_bits()`-bit strings.
    pub fn eval_total(&self, x: u64) -> u64 {
        self.eval(x)
            .unwrap_or_else(|_| self.reserved_image().expect("only Rabin has illegal inputs"))
    }

    pub fn chk(&self, x: u64, y: u64) -> bool {
        self.eval(x).map_or(false, |v| v == y)
    }

    pub fn domain_size(&self) -> usize {
        1usize << self.input_bits()
    }

    pub fn legal_inputs(&self) -> Vec<u64> {
        (0..self.domain_size() as u64).filter(|&x| self.is_legal(x)).collect()
    }

    /// Exhaustive claw table `(y, x0, x1)` with `x0 < x1`, sorted by `y`.
    pub fn claws_bruteforce(&self) -> Result<Vec<(u64, u64, u64)>> {
        if self.input_bits() > 16 {
            return Err(Error::Bound {
                what: format!("{}-bit domain", self.input_bits()),
                bound: 16,
            });
        }
        let mut by_image: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
        for x in self.legal_inputs() {
            by_image.entry(self.eval(x)?).or_default().push(x);
        }
        by_image
            .into_iter()
            .map(|(y, xs)| match xs[..] {
                [a, b] => Ok((y, a, b)),
                _ => Err(Error::Inconsistent(format!(
                    "image {y} has {} preimages",
                    xs.len()
                ))),
            })
            .collect()
    }

    /// One polynomial per output bit of `eval_total`.
    pub fn function_anf(&self) -> Result<Vec<AnfPolynomial>> {
        let m = self.input_bits();
        if m > MAX_ANF_VARS {
            return Err(Error::Bound {
                what: format!("{m} input bits"),
                bound: MAX_ANF_VARS,
            });
        }
        (0..self.output_bits())
            .map(|b| truth_table_anf(m, b, |x| self.eval_total(x)))
            .collect()
    }
}

impl TcfTrapdoor {
    /// The two legal preimages of `y` in increasing order.
    pub fn invert(&self, key: &TcfKey, y: u64) -> Result<(u64, u64)> {
        match (self, key) {
            (TcfTrapdoor::Rabin { p, q }, TcfKey::Rabin { n }) => {
                if p * q != *n {
                    return Err(Error::InvalidKey("trapdoor does not match key".into()));
                }
                if y >= *n || gcd(y, *n) != 1 {
                    return Err(Error::NotInImage(y));
                }
                let a = sqrt_mod_prime(y % p, *p).ok_or(Error::NotInImage(y))?;
                let b = sqrt_mod_prime(y % q, *q).ok_or(Error::NotInImage(y))?;
                let (cp, cq) = (q * inv_mod(*q, *p) % n, p * inv_mod(*p, *q) % n);
                let crt = |u: u64, v: u64| (u * cp + v * cq) % n;
                let mut roots: Vec<u64> = [crt(a, b), crt(a, q - b), crt(p - a, b), crt(p - a, q - b)]
                    .into_iter()
                    .filter(|&r| key.is_legal(r))
                    .collect();
                roots.sort_unstable();
                roots.dedup();
                match roots[..] {
                    [x0, x1] => Ok((x0, x1)),
                    _ => Err(Error::NotInImage(y)),
                }
            }
            (TcfTrapdoor::Toy { s }, TcfKey::Toy { perm, .. }) => {
                let z = perm.iter().position(|&v| v == y).ok_or(Error::NotInImage(y))? as u64;
                if z > z ^ s {
                    return Err(Error::NotInImage(y));
                }
                Ok((z, z ^ s))
            }
            _ => Err(Error::InvalidKey("trapdoor family does not match key".into())),
        }
    }
}
