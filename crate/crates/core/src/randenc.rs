//! Perfect randomized encoding of a mod-2 branching program.
//!
//! For a program of size `l` let `n = l - 1` and let `L(x)` be its `n x n`
//! matrix. Garbling multiplies `M = R1 * L(x) * R2`, where `R1` is upper
//! unitriangular with `C(n,2)` random entries and `R2` is the identity plus
//! `n - 1` random entries in its last column. Each entry of `M` is a sum of
//! monomials `T_1 + ... + T_k` of degree at most 3, and is published as the
//! block
//!
//! ```text
//! (T_1+r_1, ..., T_k+r_k, r_1+r'_1, r'_1+r_2+r'_2, ..., r'_{k-1}+r_k)
//! ```
//!
//! whose bits xor to the entry. Every output bit reads at most 4 input bits.
//!
//! Randomness layout inside an instance: `r1 | r2 | r | r'`, with `r1` in
//! diagonal order (`R1[0][1], R1[1][2], .., R1[0][2], ..`), `r2[k] =
//! R2[k][n-1]`, and `r`, `r'` concatenated over entries in row-major order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::bp::Mod2Bp;
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;

/// Product of at most one literal from each of `r1`, `x`, `r2`; an empty
/// monomial is the constant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub r1: Option<usize>,
    pub x: Option<usize>,
    pub r2: Option<usize>,
}

impl Monomial {
    pub fn degree(&self) -> usize {
        self.r1.is_some() as usize + self.x.is_some() as usize + self.r2.is_some() as usize
    }

    pub fn eval(&self, x: &BitVec, r1: &BitVec, r2: &BitVec) -> bool {
        self.r1.map_or(true, |i| r1.get(i))
            && self.x.map_or(true, |i| x.get(i))
            && self.r2.map_or(true, |i| r2.get(i))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryLayout {
    pub row: usize,
    pub col: usize,
    /// Number of monomials `k`.
    pub k: usize,
    /// Offset of `r_1..r_k` within the instance randomness.
    pub r_offset: usize,
    /// Offset of `r'_1..r'_{k-1}` within the instance randomness.
    pub rp_offset: usize,
    /// Offset of the entry block within the encoded output.
    pub out_offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomnessLayout {
    pub n: usize,
    pub num_x: usize,
    pub n_r1: usize,
    pub n_r2: usize,
    pub n_r: usize,
    pub n_rp: usize,
    pub entries: Vec<EntryLayout>,
}

impl RandomnessLayout {
    /// Randomness bits of the instance (excluding `x`).
    pub fn total_bits(&self) -> usize {
        self.n_r1 + self.n_r2 + self.n_r + self.n_rp
    }

    /// Preimage bits `x | randomness`.
    pub fn preimage_bits(&self) -> usize {
        self.num_x + self.total_bits()
    }

    pub fn output_bits(&self) -> usize {
        2 * self.n_r
    }

    pub fn r2_offset(&self) -> usize {
        self.n_r1
    }

    pub fn r_offset(&self) -> usize {
        self.n_r1 + self.n_r2
    }

    pub fn rp_offset(&self) -> usize {
        self.n_r1 + self.n_r2 + self.n_r
    }

    /// Index of `R1[a][b]` (`a < b`) in `r1`.
    pub fn r1_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.n);
        let d = b - a;
        (1..d).map(|e| self.n - e).sum::<usize>() + a
    }
}

/// The randomness of one instance, split into its four segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Randomness {
    pub r1: BitVec,
    pub r2: BitVec,
    pub r: BitVec,
    pub rp: BitVec,
}

impl Randomness {
    pub fn zeros(layout: &RandomnessLayout) -> Self {
        Randomness {
            r1: BitVec::zeros(layout.n_r1),
            r2: BitVec::zeros(layout.n_r2),
            r: BitVec::zeros(layout.n_r),
            rp: BitVec::zeros(layout.n_rp),
        }
    }

    pub fn random<R: Rng + ?Sized>(layout: &RandomnessLayout, rng: &mut R) -> Self {
        Randomness {
            r1: BitVec::random(layout.n_r1, rng),
            r2: BitVec::random(layout.n_r2, rng),
            r: BitVec::random(layout.n_r, rng),
            rp: BitVec::random(layout.n_rp, rng),
        }
    }

    pub fn to_bits(&self) -> BitVec {
        BitVec::concat(&[&self.r1, &self.r2, &self.r, &self.rp])
    }

    pub fn from_bits(layout: &RandomnessLayout, bits: &BitVec) -> Result<Self> {
        if bits.len() != layout.total_bits() {
            return Err(Error::LengthMismatch {
                expected: layout.total_bits(),
                got: bits.len(),
            });
        }
        let a = layout.r2_offset();
        let b = layout.r_offset();
        let c = layout.rp_offset();
        Ok(Randomness {
            r1: bits.slice(0..a),
            r2: bits.slice(a..b),
            r: bits.slice(b..c),
            rp: bits.slice(c..bits.len()),
        })
    }
}

/// Per-entry bit blocks of an encoded output.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodedOutput {
    pub blocks: Vec<BitVec>,
}

impl EncodedOutput {
    pub fn to_bits(&self) -> BitVec {
        let refs: Vec<&BitVec> = self.blocks.iter().collect();
        BitVec::concat(&refs)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// `<entry index> <hex>` lines for entries with nonempty blocks.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (e, b) in self.blocks.iter().enumerate() {
            if !b.is_empty() {
                s.push_str(&format!("{e} {} {}\n", b.len(), b.to_hex()));
            }
        }
        s
    }
}

/// How one output bit of the encoding is computed from preimage positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputGate {
    /// `T + r`: the AND of `factors` (empty means constant 1) xored with `mask`.
    Term { factors: Vec<usize>, mask: usize },
    /// XOR of the listed positions.
    Chain { inputs: Vec<usize> },
}

impl OutputGate {
    pub fn support(&self) -> Vec<usize> {
        match self {
            OutputGate::Term { factors, mask } => {
                let mut s = factors.clone();
                s.push(*mask);
                s
            }
            OutputGate::Chain { inputs } => inputs.clone(),
        }
    }

    pub fn eval(&self, pre: &BitVec) -> bool {
        match self {
            OutputGate::Term { factors, mask } => {
                factors.iter().all(|&i| pre.get(i)) ^ pre.get(*mask)
            }
            OutputGate::Chain { inputs } => inputs.iter().fold(false, |a, &i| a ^ pre.get(i)),
        }
    }
}

/// Report of the encoded function's qubit requirements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthReport {
    pub instances: usize,
    pub max_bp_size: usize,
    pub input_bits: usize,
    pub randomness_bits: usize,
    pub preimage_bits: usize,
    pub replicated_qubits: usize,
    pub output_bits: usize,
    pub fold_blocks: usize,
    pub total_qubits: usize,
    pub asymptotic: String,
    pub full_scale_note: String,
}

pub const FULL_SCALE_NOTE: &str = "the full-scale LWE instantiation needs on the order of \
lambda^33 qubits; this is outside desk scale and is not computed";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReInstance {
    bp: Mod2Bp,
    layout: RandomnessLayout,
    monomials: Vec<Vec<Monomial>>,
}

impl ReInstance {
    pub fn build(bp: &Mod2Bp) -> Result<Self> {
        let n = bp.size() - 1;
        let l = bp.l_matrix_symbolic();
        let mut layout = RandomnessLayout {
            n,
            num_x: bp.num_vars(),
            n_r1: n * (n - 1) / 2,
            n_r2: n - 1,
            n_r: 0,
            n_rp: 0,
            entries: Vec::with_capacity(n * n),
        };
        let mut monomials = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut list = Vec::new();
                for k1 in i..n {
                    let r1 = (k1 > i).then(|| layout.r1_index(i, k1));
                    let k2_range: Vec<usize> = if j + 1 == n { (0..n).collect() } else { vec![j] };
                    for k2 in k2_range {
                        let r2 = (k2 != j).then_some(k2);
                        let form = &l[k1][k2];
                        if form.constant {
                            list.push(Monomial { r1, x: None, r2 });
                        }
                        for &v in &form.vars {
                            list.push(Monomial { r1, x: Some(v), r2 });
                        }
                    }
                }
                let k = list.len();
                layout.entries.push(EntryLayout {
                    row: i,
                    col: j,
                    k,
                    r_offset: layout.n_r,
                    rp_offset: layout.n_rp,
                    out_offset: 2 * layout.n_r,
                });
                layout.n_r += k;
                layout.n_rp += k.saturating_sub(1);
                monomials.push(list);
            }
        }
        Ok(ReInstance {
            bp: bp.clone(),
            layout,
            monomials,
        })
    }

    pub fn bp(&self) -> &Mod2Bp {
        &self.bp
    }

    pub fn layout(&self) -> &RandomnessLayout {
        &self.layout
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    /// Monomials of entry `(i, j)` in canonical order.
    pub fn entry_monomials(&self, i: usize, j: usize) -> &[Monomial] {
        &self.monomials[i * self.layout.n + j]
    }

    pub fn r1_matrix(&self, r1: &BitVec) -> Gf2Matrix {
        let n = self.layout.n;
        let mut m = Gf2Matrix::identity(n);
        for a in 0..n {
            for b in a + 1..n {
                m.set(a, b, r1.get(self.layout.r1_index(a, b)));
            }
        }
        m
    }

    pub fn r2_matrix(&self, r2: &BitVec) -> Gf2Matrix {
        let n = self.layout.n;
        let mut m = Gf2Matrix::identity(n);
        for k in 0..n - 1 {
            m.set(k, n - 1, r2.get(k));
        }
        m
    }

    fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected != got {
            return Err(Error::LengthMismatch { expected, got });
        }
        Ok(())
    }

    /// `R1 L(x) R2` by direct matrix multiplication.
    pub fn apply_tilde(&self, x: &BitVec, r1: &BitVec, r2: &BitVec) -> Result<Gf2Matrix> {
        Self::check_len(self.layout.n_r1, r1.len())?;
        Self::check_len(self.layout.n_r2, r2.len())?;
        let l = self.bp.l_matrix(&x.to_bools())?;
        self.r1_matrix(r1).mul(&l)?.mul(&self.r2_matrix(r2))
    }

    /// The same matrix assembled from the monomial tables.
    pub fn apply_tilde_monomials(&self, x: &BitVec, r1: &BitVec, r2: &BitVec) -> Gf2Matrix {
        let n = self.layout.n;
        let mut m = Gf2Matrix::zeros(n, n);
        for (e, list) in self.monomials.iter().enumerate() {
            let v = list.iter().fold(false, |a, t| a ^ t.eval(x, r1, r2));
            m.set(e / n, e % n, v);
        }
        m
    }

    pub fn encode(&self, x: &BitVec, rand: &Randomness) -> Result<EncodedOutput> {
        Self::check_len(self.layout.num_x, x.len())?;
        Self::check_len(self.layout.n_r1, rand.r1.len())?;
        Self::check_len(self.layout.n_r2, rand.r2.len())?;
        Self::check_len(self.layout.n_r, rand.r.len())?;
        Self::check_len(self.layout.n_rp, rand.rp.len())?;
        let mut blocks = Vec::with_capacity(self.monomials.len());
        for (list, ent) in self.monomials.iter().zip(&self.layout.entries) {
            let k = ent.k;
            let r = |m: usize| rand.r.get(ent.r_offset + m);
            let rp = |m: usize| rand.rp.get(ent.rp_offset + m);
            let mut block = BitVec::with_capacity(2 * k);
            for (m, t) in list.iter().enumerate() {
                block.push(t.eval(x, &rand.r1, &rand.r2) ^ r(m));
            }
            if k == 1 {
                block.push(r(0));
            } else if k > 1 {
                block.push(r(0) ^ rp(0));
                for m in 1..k - 1 {
                    block.push(rp(m - 1) ^ r(m) ^ rp(m));
                }
                block.push(rp(k - 2) ^ r(k - 1));
            }
            blocks.push(block);
        }
        Ok(EncodedOutput { blocks })
    }

    /// Encodes a flat preimage `x | r1 | r2 | r | r'`.
    pub fn apply_hat(&self, preimage: &BitVec) -> Result<EncodedOutput> {
        Self::check_len(self.layout.preimage_bits(), preimage.len())?;
        let nx = self.layout.num_x;
        let x = preimage.slice(0..nx);
        let rand = Randomness::from_bits(&self.layout, &preimage.slice(nx..preimage.len()))?;
        self.encode(&x, &rand)
    }

    pub fn split_output(&self, bits: &BitVec) -> Result<EncodedOutput> {
        Self::check_len(self.layout.output_bits(), bits.len())?;
        let blocks = self
            .layout
            .entries
            .iter()
            .map(|e| bits.slice(e.out_offset..e.out_offset + 2 * e.k))
            .collect();
        Ok(EncodedOutput { blocks })
    }

    fn check_blocks(&self, y: &EncodedOutput) -> Result<()> {
        Self::check_len(self.layout.entries.len(), y.blocks.len())?;
        for (b, e) in y.blocks.iter().zip(&self.layout.entries) {
            Self::check_len(2 * e.k, b.len())?;
        }
        Ok(())
    }

    /// Xors every block into its entry.
    pub fn fold_matrix(&self, y: &EncodedOutput) -> Result<Gf2Matrix> {
        self.check_blocks(y)?;
        let n = self.layout.n;
        let mut m = Gf2Matrix::zeros(n, n);
        for (e, b) in y.blocks.iter().enumerate() {
            m.set(e / n, e % n, b.parity());
        }
        Ok(m)
    }

    pub fn decode(&self, y: &EncodedOutput) -> Result<bool> {
        self.fold_matrix(y)?.det()
    }

    /// The canonical matrix with ones on the subdiagonal and `y` in the
    /// top-right corner.
    pub fn lambda(&self, y: bool) -> Gf2Matrix {
        let n = self.layout.n;
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 1..n {
            m.set(i, i - 1, true);
        }
        if y {
            m.set(0, n - 1, !m.get(0, n - 1));
        }
        m
    }

    pub fn simulate<R: Rng + ?Sized>(&self, y: bool, rng: &mut R) -> EncodedOutput {
        let r1 = BitVec::random(self.layout.n_r1, rng);
        let r2 = BitVec::random(self.layout.n_r2, rng);
        let m = self
            .r1_matrix(&r1)
            .mul(&self.lambda(y))
            .and_then(|t| t.mul(&self.r2_matrix(&r2)))
            .expect("square matrices of equal size");
        let n = self.layout.n;
        let blocks = self
            .layout
            .entries
            .iter()
            .enumerate()
            .map(|(e, ent)| {
                let target = m.get(e / n, e % n);
                if ent.k == 0 {
                    debug_assert!(!target, "entries without monomials vanish");
                    return BitVec::zeros(0);
                }
                let mut b = BitVec::random(2 * ent.k, rng);
                if b.parity() != target {
                    b.flip(2 * ent.k - 1);
                }
                b
            })
            .collect();
        EncodedOutput { blocks }
    }

    /// Number of fresh unknowns solved on each diagonal `e = j - i`
    /// (`e = 0, 1, .., n-1`).
    pub fn unknowns_per_diagonal(&self) -> Vec<usize> {
        let n = self.layout.n;
        (0..n)
            .map(|e| {
                (0..n - e)
                    .filter(|&i| {
                        let j = i + e;
                        j + 1 < n || i >= 1
                    })
                    .count()
            })
            .collect()
    }

    /// Recovers the unique randomness with `encode(x, rand) = y`.
    ///
    /// On diagonal `e` each entry `(i, i+e)` contains exactly one fresh
    /// unknown with coefficient 1: `R1[i][i+e+1]` when `i+e < n-1`, otherwise
    /// `R2[i-1][n-1]`; the remaining terms only involve earlier diagonals.
    /// Entries on the subdiagonal, below it, and in the top-right corner are
    /// consistency checks, enforced by re-encoding at the end.
    pub fn reconstruct(&self, x: &BitVec, y: &EncodedOutput) -> Result<Randomness> {
        Self::check_len(self.layout.num_x, x.len())?;
        let target = self.fold_matrix(y)?;
        let n = self.layout.n;
        let l = self.bp.l_matrix(&x.to_bools())?;
        let mut r1m = Gf2Matrix::identity(n);
        let mut r2col = BitVec::zeros(n);
        r2col.set(n - 1, true);

        for e in 0..n {
            for i in 0..n - e {
                let j = i + e;
                if j + 1 < n {
                    let partial = (i..=j).fold(false, |acc, k1| acc ^ (r1m.get(i, k1) & l.get(k1, j)));
                    r1m.set(i, j + 1, partial ^ target.get(i, j));
                } else if i >= 1 {
                    let mut acc = false;
                    for k1 in i..n {
                        if !r1m.get(i, k1) {
                            continue;
                        }
                        let mut lr = false;
                        for k2 in k1.saturating_sub(1)..n {
                            lr ^= l.get(k1, k2) & r2col.get(k2);
                        }
                        acc ^= lr;
                    }
                    r2col.set(i - 1, acc ^ target.get(i, j));
                }
            }
        }

        let mut rand = Randomness::zeros(&self.layout);
        for a in 0..n {
            for b in a + 1..n {
                rand.r1.set(self.layout.r1_index(a, b), r1m.get(a, b));
            }
        }
        for k in 0..n - 1 {
            rand.r2.set(k, r2col.get(k));
        }
        for ((list, ent), block) in self.monomials.iter().zip(&self.layout.entries).zip(&y.blocks) {
            let mut prev = false;
            for (m, t) in list.iter().enumerate() {
                let rm = block.get(m) ^ t.eval(x, &rand.r1, &rand.r2);
                rand.r.set(ent.r_offset + m, rm);
                if m + 1 < ent.k {
                    let rp = block.get(ent.k + m) ^ prev ^ rm;
                    rand.rp.set(ent.rp_offset + m, rp);
                    prev = rp;
                }
            }
        }
        if &self.encode(x, &rand)? != y {
            return Err(Error::Inconsistent(
                "no randomness re-encodes to the given output".into(),
            ));
        }
        Ok(rand)
    }

    /// Output gates in terms of positions of the flat preimage
    /// `x | r1 | r2 | r | r'`, shifted by `rand_base` for the randomness part.
    pub fn output_gates(&self, rand_base: usize) -> Vec<OutputGate> {
        let lay = &self.layout;
        let r1p = |i: usize| rand_base + i;
        let r2p = |i: usize| rand_base + lay.r2_offset() + i;
        let rp_ = |i: usize| rand_base + lay.r_offset() + i;
        let rpp = |i: usize| rand_base + lay.rp_offset() + i;
        let mut out = Vec::with_capacity(lay.output_bits());
        for (list, ent) in self.monomials.iter().zip(&lay.entries) {
            for (m, t) in list.iter().enumerate() {
                let mut factors = Vec::with_capacity(3);
                factors.extend(t.r1.map(r1p));
                factors.extend(t.x);
                factors.extend(t.r2.map(r2p));
                out.push(OutputGate::Term {
                    factors,
                    mask: rp_(ent.r_offset + m),
                });
            }
            let k = ent.k;
            let r = |m: usize| rp_(ent.r_offset + m);
            let q = |m: usize| rpp(ent.rp_offset + m);
            if k == 1 {
                out.push(OutputGate::Chain { inputs: vec![r(0)] });
            } else if k > 1 {
                out.push(OutputGate::Chain { inputs: vec![r(0), q(0)] });
                for m in 1..k - 1 {
                    out.push(OutputGate::Chain {
                        inputs: vec![q(m - 1), r(m), q(m)],
                    });
                }
                out.push(OutputGate::Chain {
                    inputs: vec![q(k - 2), r(k - 1)],
                });
            }
        }
        out
    }
}

/// A multi-output function encoded bit by bit with independent randomness.
///
/// Preimage: `x | rand_0 | rand_1 | ..`; output: the concatenation of the
/// per-bit encodings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedFunction {
    num_inputs: usize,
    instances: Vec<ReInstance>,
    rand_offsets: Vec<usize>,
    out_offsets: Vec<usize>,
    preimage_len: usize,
    output_len: usize,
}

impl EncodedFunction {
    pub fn new(bps: &[Mod2Bp]) -> Result<Self> {
        let num_inputs = bps.first().map_or(0, |b| b.num_vars());
        let mut instances = Vec::with_capacity(bps.len());
        let mut rand_offsets = Vec::with_capacity(bps.len());
        let mut out_offsets = Vec::with_capacity(bps.len());
        let mut pre = num_inputs;
        let mut out = 0;
        for bp in bps {
            if bp.num_vars() != num_inputs {
                return Err(Error::LengthMismatch {
                    expected: num_inputs,
                    got: bp.num_vars(),
                });
            }
            let inst = ReInstance::build(bp)?;
            rand_offsets.push(pre);
            out_offsets.push(out);
            pre += inst.layout.total_bits();
            out += inst.layout.output_bits();
            instances.push(inst);
        }
        Ok(EncodedFunction {
            num_inputs,
            instances,
            rand_offsets,
            out_offsets,
            preimage_len: pre,
            output_len: out,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.instances.len()
    }

    pub fn instances(&self) -> &[ReInstance] {
        &self.instances
    }

    pub fn preimage_len(&self) -> usize {
        self.preimage_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn rand_offset(&self, b: usize) -> usize {
        self.rand_offsets[b]
    }

    pub fn output_offset(&self, b: usize) -> usize {
        self.out_offsets[b]
    }

    fn rand_range(&self, b: usize) -> std::ops::Range<usize> {
        let start = self.rand_offsets[b];
        start..start + self.instances[b].layout.total_bits()
    }

    fn out_range(&self, b: usize) -> std::ops::Range<usize> {
        let start = self.out_offsets[b];
        start..start + self.instances[b].layout.output_bits()
    }

    pub fn random_preimage<R: Rng + ?Sized>(&self, x: &BitVec, rng: &mut R) -> BitVec {
        let mut pre = x.clone();
        pre.extend_from(&BitVec::random(self.preimage_len - self.num_inputs, rng));
        pre
    }

    pub fn input_of(&self, preimage: &BitVec) -> BitVec {
        preimage.slice(0..self.num_inputs)
    }

    pub fn apply_hat(&self, preimage: &BitVec) -> Result<BitVec> {
        ReInstance::check_len(self.preimage_len, preimage.len())?;
        let x = self.input_of(preimage);
        let mut out = BitVec::with_capacity(self.output_len);
        for (b, inst) in self.instances.iter().enumerate() {
            let rand = Randomness::from_bits(&inst.layout, &preimage.slice(self.rand_range(b)))?;
            out.extend_from(&inst.encode(&x, &rand)?.to_bits());
        }
        Ok(out)
    }

    pub fn split(&self, y: &BitVec) -> Result<Vec<EncodedOutput>> {
        ReInstance::check_len(self.output_len, y.len())?;
        self.instances
            .iter()
            .enumerate()
            .map(|(b, inst)| inst.split_output(&y.slice(self.out_range(b))))
            .collect()
    }

    /// Decoded output bits, bit `b` from instance `b`.
    pub fn decode(&self, y: &BitVec) -> Result<u64> {
        let parts = self.split(y)?;
        let mut v = 0u64;
        for (b, (inst, part)) in self.instances.iter().zip(&parts).enumerate() {
            if inst.decode(part)? {
                v |= 1 << b;
            }
        }
        Ok(v)
    }

    /// Full preimage `x | rand` with `apply_hat(x | rand) = y`.
    pub fn reconstruct(&self, x: &BitVec, y: &BitVec) -> Result<BitVec> {
        ReInstance::check_len(self.num_inputs, x.len())?;
        let parts = self.split(y)?;
        let mut pre = x.clone();
        for (inst, part) in self.instances.iter().zip(&parts) {
            pre.extend_from(&inst.reconstruct(x, part)?.to_bits());
        }
        Ok(pre)
    }

    /// One gate description per output bit, over flat preimage positions.
    pub fn output_gates(&self) -> Vec<OutputGate> {
        let mut out = Vec::with_capacity(self.output_len);
        for (b, inst) in self.instances.iter().enumerate() {
            out.extend(inst.output_gates(self.rand_offsets[b]));
        }
        out
    }

    /// Output-bit block sizes (2k per entry, empty entries omitted).
    pub fn block_sizes(&self) -> Vec<usize> {
        self.instances
            .iter()
            .flat_map(|i| i.layout.entries.iter().filter(|e| e.k > 0).map(|e| 2 * e.k))
            .collect()
    }

    /// Number of gates reading each preimage bit (at least 1).
    pub fn preimage_fanout(&self) -> Vec<usize> {
        let mut f = vec![0usize; self.preimage_len];
        for g in self.output_gates() {
            for i in g.support() {
                f[i] += 1;
            }
        }
        f.into_iter().map(|c| c.max(1)).collect()
    }

    pub fn locality(&self) -> usize {
        self.output_gates()
            .iter()
            .map(|g| {
                let mut s = g.support();
                s.sort_unstable();
                s.dedup();
                s.len()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn estimate_width(&self) -> WidthReport {
        let replicated: usize = self.preimage_fanout().iter().sum();
        WidthReport {
            instances: self.instances.len(),
            max_bp_size: self.instances.iter().map(|i| i.bp.size()).max().unwrap_or(0),
            input_bits: self.num_inputs,
            randomness_bits: self.preimage_len - self.num_inputs,
            preimage_bits: self.preimage_len,
            replicated_qubits: replicated,
            output_bits: self.output_len,
            fold_blocks: self.preimage_len,
            total_qubits: replicated + self.output_len,
            asymptotic: "O(λ·l⁴)".into(),
            full_scale_note: FULL_SCALE_NOTE.into(),
        }
    }
}
