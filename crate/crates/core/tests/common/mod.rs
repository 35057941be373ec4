#![allow(dead_code)]

use dpoq_core::bp::{Edge, Label, Mod2Bp};
use dpoq_core::gf2::Gf2Matrix;
use rand::Rng;

/// Random BP on `size` vertices: every forward pair gets an edge with
/// probability 1/2 and a uniformly random label.
pub fn random_bp<R: Rng>(size: usize, vars: usize, rng: &mut R) -> Mod2Bp {
    let mut edges = Vec::new();
    for from in 0..size {
        for to in from + 1..size {
            if rng.gen() {
                let v = rng.gen_range(0..vars);
                let label = match rng.gen_range(0..3) {
                    0 => Label::One,
                    1 => Label::Pos(v),
                    _ => Label::Neg(v),
                };
                edges.push(Edge { from, to, label });
            }
        }
    }
    Mod2Bp::new(size, vars, edges).unwrap()
}

/// Parity of the number of source-to-sink paths, by enumeration.
pub fn path_parity(bp: &Mod2Bp, x: &[bool]) -> bool {
    fn go(bp: &Mod2Bp, x: &[bool], v: usize) -> u64 {
        if v == bp.size() - 1 {
            return 1;
        }
        bp.edges()
            .iter()
            .filter(|e| e.from == v && e.label.active(x))
            .map(|e| go(bp, x, e.to))
            .sum()
    }
    go(bp, x, 0) % 2 == 1
}

/// Naive triple-loop product over GF(2).
pub fn matmul(a: &Gf2Matrix, b: &Gf2Matrix) -> Gf2Matrix {
    let mut c = Gf2Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = false;
            for k in 0..a.cols() {
                s ^= a.get(i, k) & b.get(k, j);
            }
            c.set(i, j, s);
        }
    }
    c
}

pub fn entries(m: &Gf2Matrix) -> Vec<bool> {
    (0..m.rows()).flat_map(|i| (0..m.cols()).map(move |j| (i, j))).map(|(i, j)| m.get(i, j)).collect()
}

pub fn bits_of(x: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (x >> i) & 1 == 1).collect()
}
