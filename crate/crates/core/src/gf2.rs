//! Dense matrices over GF(2) with packed rows.

use std::fmt;

use crate::bits::BitVec;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Gf2Matrix {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Gf2Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix literal");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v & 1 == 1);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i].set(j, v)
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.data[i]
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for j in row.ones_indices() {
                t.set(j, i, true);
            }
        }
        t
    }

    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Gf2Matrix::zeros(self.rows, other.cols);
        for (i, row) in self.data.iter().enumerate() {
            let acc = &mut out.data[i];
            for k in row.ones_indices() {
                acc.xor_assign(&other.data[k]);
            }
        }
        Ok(out)
    }

    /// Determinant over GF(2) by Gaussian elimination; the pivot for each
    /// column is the first row at or below the diagonal with a 1.
    pub fn det(&self) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| a[r].get(col)) else {
                return Ok(false);
            };
            a.swap(col, p);
            let pivot = a[col].clone();
            for row in a.iter_mut().skip(col + 1) {
                if row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
        }
        Ok(true)
    }

    pub fn rank(&self) -> usize {
        let mut a = self.data.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| a[r].get(col)) else {
                continue;
            };
            a.swap(rank, p);
            let pivot = a[rank].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `self * x = rhs`. Returns `None` when the system is
    /// inconsistent; free variables are set to zero.
    pub fn solve(&self, rhs: &BitVec) -> Result<Option<BitVec>> {
        if rhs.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                got: rhs.len(),
            });
        }
        let mut a = self.data.clone();
        let mut b: Vec<bool> = rhs.iter().collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| a[r].get(col)) else {
                continue;
            };
            a.swap(rank, p);
            b.swap(rank, p);
            let pivot = a[rank].clone();
            let pb = b[rank];
            for r in 0..self.rows {
                if r != rank && a[r].get(col) {
                    a[r].xor_assign(&pivot);
                    b[r] ^= pb;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if b[rank..].iter().any(|&v| v) {
            return Ok(None);
        }
        let mut x = BitVec::zeros(self.cols);
        for (r, &col) in pivots.iter().enumerate() {
            x.set(col, b[r]);
        }
        Ok(Some(x))
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.rows, self.cols)?;
        for row in &self.data {
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}
