//! Algebraic normal form over GF(2).
//!
//! A monomial is a bit mask over variable indices; mask 0 is the constant 1.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest variable count accepted by exhaustive truth-table extraction.
pub const MAX_ANF_VARS: usize = 16;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AnfPolynomial {
    num_vars: usize,
    monomials: BTreeSet<u64>,
}

impl AnfPolynomial {
    pub fn zero(num_vars: usize) -> Self {
        AnfPolynomial {
            num_vars,
            monomials: BTreeSet::new(),
        }
    }

    pub fn one(num_vars: usize) -> Self {
        let mut p = AnfPolynomial::zero(num_vars);
        p.monomials.insert(0);
        p
    }

    /// Sums monomials given as variable-index lists; repeated monomials cancel.
    pub fn from_monomials<I, M>(num_vars: usize, monomials: I) -> Self
    where
        I: IntoIterator<Item = M>,
        M: AsRef<[usize]>,
    {
        let mut p = AnfPolynomial::zero(num_vars);
        for m in monomials {
            let mut mask = 0u64;
            for &v in m.as_ref() {
                assert!(v < num_vars, "variable {v} outside {num_vars}");
                mask |= 1 << v;
            }
            p.toggle(mask);
        }
        p
    }

    pub fn toggle(&mut self, mask: u64) {
        if !self.monomials.remove(&mask) {
            self.monomials.insert(mask);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn monomials(&self) -> impl Iterator<Item = u64> + '_ {
        self.monomials.iter().copied()
    }

    /// Monomials as sorted variable-index lists.
    pub fn monomial_vars(&self) -> Vec<Vec<usize>> {
        self.monomials
            .iter()
            .map(|&m| (0..64).filter(|&v| (m >> v) & 1 == 1).collect())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.monomials
            .iter()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Evaluates at the point whose bit `i` is variable `i`.
    pub fn eval_u64(&self, x: u64) -> bool {
        self.monomials.iter().fold(false, |acc, &m| acc ^ (x & m == m))
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        let packed = x
            .iter()
            .take(64)
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        self.eval_u64(packed)
    }
}

impl fmt::Display for AnfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .monomial_vars()
            .into_iter()
            .map(|vars| {
                if vars.is_empty() {
                    "1".to_string()
                } else {
                    vars.iter().map(|v| format!("x{v}")).collect::<Vec<_>>().join("*")
                }
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// ANF of bit `out_bit` of `f` over `num_vars` input bits, via the GF(2)
/// Möbius transform of the exhaustive truth table.
pub fn truth_table_anf<F>(num_vars: usize, out_bit: usize, f: F) -> Result<AnfPolynomial>
where
    F: Fn(u64) -> u64,
{
    if num_vars > MAX_ANF_VARS {
        return Err(Error::Bound {
            what: format!("{num_vars} input variables"),
            bound: MAX_ANF_VARS,
        });
    }
    let size = 1usize << num_vars;
    let mut coeffs: Vec<bool> = (0..size as u64).map(|x| (f(x) >> out_bit) & 1 == 1).collect();
    let mut step = 1;
    while step < size {
        for base in (0..size).step_by(2 * step) {
            for i in base..base + step {
                coeffs[i + step] ^= coeffs[i];
            }
        }
        step <<= 1;
    }
    let mut p = AnfPolynomial::zero(num_vars);
    for (mask, &c) in coeffs.iter().enumerate() {
        if c {
            p.monomials.insert(mask as u64);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xor_and_and_forms() {
        let xor = truth_table_anf(2, 0, |x| (x ^ (x >> 1)) & 1).unwrap();
        assert_eq!(xor, AnfPolynomial::from_monomials(2, [vec![0], vec![1]]));
        let and = truth_table_anf(2, 0, |x| x & (x >> 1) & 1).unwrap();
        assert_eq!(and, AnfPolynomial::from_monomials(2, [vec![0, 1]]));
        assert_eq!(and.to_string(), "x0*x1");
    }

    #[test]
    fn squaring_mod_21_bit0() {
        let p = truth_table_anf(5, 0, |x| (x * x) % 21).unwrap();
        for x in 0..32u64 {
            assert_eq!(p.eval_u64(x), ((x * x) % 21) & 1 == 1, "x={x}");
        }
    }

    #[test]
    fn duplicates_cancel() {
        let p = AnfPolynomial::from_monomials(3, [vec![0, 1], vec![1, 0], vec![2]]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.monomial_vars(), vec![vec![2]]);
    }

    #[test]
    fn too_many_vars_rejected() {
        assert!(matches!(
            truth_table_anf(17, 0, |x| x),
            Err(Error::Bound { bound: 16, .. })
        ));
    }

    proptest! {
        #[test]
        fn anf_agrees_with_black_box(table in proptest::collection::vec(any::<bool>(), 64)) {
            let f = |x: u64| table[x as usize] as u64;
            let p = truth_table_anf(6, 0, f).unwrap();
            for x in 0..64u64 {
                prop_assert_eq!(p.eval_u64(x), table[x as usize]);
            }
        }
    }
}
