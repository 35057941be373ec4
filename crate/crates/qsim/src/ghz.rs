//! Poor man's cat states, folding, GHZ reduction and rotated measurement.

use dpoq_core::BitVec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QsimError, Result};
use crate::meter::DepthMeter;
use crate::state::{ry, Gate, SparseState};

/// Correction mask from parity outcomes: `w_0 = 0`, `w_{i+1} = w_i ^ z_i`.
pub fn prefix_xor_mask(z: &BitVec) -> BitVec {
    let mut w = BitVec::with_capacity(z.len() + 1);
    let mut acc = false;
    w.push(false);
    for b in z.iter() {
        acc ^= b;
        w.push(acc);
    }
    w
}

/// Records the five layers and one interleaving of cat-state preparation:
/// H, two CNOT layers into parity ancillas, parity measurement, classical
/// prefix xor, and the X correction.
pub fn record_ghz_layers(meter: &mut DepthMeter, data_qubits: usize, parity_qubits: usize) {
    use std::collections::BTreeMap;
    let one = |name: &str, n: usize| BTreeMap::from([(name.to_string(), n)]);
    meter.unitary_census("ghz: H", one("H", data_qubits));
    meter.unitary_census("ghz: CNOT left", one("CNOT", parity_qubits));
    meter.unitary_census("ghz: CNOT right", one("CNOT", parity_qubits));
    meter.measurement("ghz: parity", parity_qubits);
    meter.interleave("ghz: prefix xor");
    meter.unitary_census("ghz: X(w)", one("X", data_qubits));
}

/// Outcome record of a cat-state preparation on one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatRecord {
    pub z: BitVec,
    pub w: BitVec,
}

/// Turns every block (qubits initially `|0>`) into a GHZ state, using
/// `scratch` (initially `|0>`) as the reusable parity ancilla.
///
/// The circuit is the constant-depth one (Hadamards, CNOTs into parity
/// ancillas, parity measurement, X correction); its qubit-disjoint parts are
/// simulated one link at a time so the support never exceeds four times the
/// final support.
pub fn prepare_cat_blocks<R: Rng + ?Sized>(
    st: &mut SparseState,
    blocks: &[Vec<usize>],
    scratch: usize,
    rng: &mut R,
) -> Result<Vec<CatRecord>> {
    let mut records = Vec::with_capacity(blocks.len());
    for block in blocks {
        let Some(&first) = block.first() else {
            records.push(CatRecord {
                z: BitVec::zeros(0),
                w: BitVec::zeros(0),
            });
            continue;
        };
        st.apply_gate(Gate::H(first))?;
        let mut z = BitVec::with_capacity(block.len().saturating_sub(1));
        for pair in block.windows(2) {
            st.apply_gate(Gate::H(pair[1]))?;
            st.apply_gate(Gate::Cnot { control: pair[0], target: scratch })?;
            st.apply_gate(Gate::Cnot { control: pair[1], target: scratch })?;
            let bit = st.measure_computational(&[scratch], rng)?.get(0);
            if bit {
                st.apply_gate(Gate::X(scratch))?;
            }
            z.push(bit);
        }
        let w = prefix_xor_mask(&z);
        let fix: Vec<Gate> = w.ones_indices().map(|i| Gate::X(block[i])).collect();
        st.apply_layer(&fix)?;
        records.push(CatRecord { z, w });
    }
    Ok(records)
}

/// Prepares an `n`-qubit GHZ state through the cat-state circuit.
pub fn prepare_ghz<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(SparseState, CatRecord, DepthMeter)> {
    let mut st = SparseState::zero(n + 1);
    let block: Vec<usize> = (0..n).collect();
    let rec = prepare_cat_blocks(&mut st, &[block.clone()], n, rng)?.remove(0);
    let st = st.restrict(&block)?;
    let mut meter = DepthMeter::new();
    record_ghz_layers(&mut meter, n, n.saturating_sub(1));
    Ok((st, rec, meter))
}

/// `(|0..0> + |1..1>)/sqrt(2)` on `n` qubits.
pub fn ghz_state(n: usize) -> SparseState {
    SparseState::uniform(n, &[BitVec::zeros(n), BitVec::ones(n)]).expect("two distinct keys")
}

/// Xor of each consecutive block of `bits`.
pub fn fold_blocks(bits: &BitVec, sizes: &[usize]) -> Result<BitVec> {
    let sum: usize = sizes.iter().sum();
    if sum != bits.len() {
        return Err(QsimError::PartitionMismatch { sum, len: bits.len() });
    }
    let mut out = BitVec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        out.push((at..at + s).fold(false, |acc, i| acc ^ bits.get(i)));
        at += s;
    }
    Ok(out)
}

/// First bit of each block; for computational outcomes of replicated
/// registers all copies agree.
pub fn unreplicate(bits: &BitVec, sizes: &[usize]) -> Result<BitVec> {
    let sum: usize = sizes.iter().sum();
    if sum != bits.len() {
        return Err(QsimError::PartitionMismatch { sum, len: bits.len() });
    }
    let mut out = BitVec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        out.push(s > 0 && bits.get(at));
        at += s;
    }
    Ok(out)
}

/// A single-qubit pure state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qubit(pub [Complex64; 2]);

impl Qubit {
    pub fn zero() -> Self {
        Qubit([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
    }

    pub fn one() -> Self {
        Qubit([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Qubit([Complex64::new(h, 0.0), Complex64::new(h, 0.0)])
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Qubit([Complex64::new(h, 0.0), Complex64::new(-h, 0.0)])
    }

    pub fn from_state(st: &SparseState) -> Result<Self> {
        if st.num_qubits() != 1 {
            return Err(QsimError::Width {
                expected: 1,
                got: st.num_qubits(),
            });
        }
        let mut amp = [Complex64::default(); 2];
        for (k, a) in st.iter() {
            amp[k.get(0) as usize] = *a;
        }
        Ok(Qubit(amp))
    }

    pub fn fidelity(&self, other: &Qubit) -> f64 {
        (self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]).norm_sqr()
    }

    pub fn apply(&self, m: [[Complex64; 2]; 2]) -> Qubit {
        Qubit([
            m[0][0] * self.0[0] + m[0][1] * self.0[1],
            m[1][0] * self.0[0] + m[1][1] * self.0[1],
        ])
    }

    pub fn z(&self) -> Qubit {
        Qubit([self.0[0], -self.0[1]])
    }

    /// Outcome probabilities after `R_Y(-theta)`.
    pub fn rotated_probabilities(&self, theta: f64) -> [f64; 2] {
        let r = self.apply(ry(-theta));
        [r.0[0].norm_sqr(), r.0[1].norm_sqr()]
    }
}

/// Measures in the basis `{cos(t/2)|0> + sin(t/2)|1>, cos(t/2)|1> - sin(t/2)|0>}`
/// by applying `R_Y(-t)` and measuring computationally. Records the rotation
/// and measurement layers.
pub fn measure_rotated<R: Rng + ?Sized>(q: &Qubit, theta: f64, rng: &mut R, meter: &mut DepthMeter) -> bool {
    let p = q.rotated_probabilities(theta);
    meter.unitary("rotate", &[Gate::Ry(0, -theta)]);
    meter.measurement("rotated measurement", 1);
    rng.gen::<f64>() * (p[0] + p[1]) >= p[0]
}

/// Measures all ancilla qubits but the first in the Hadamard basis and applies
/// `Z^{|w| mod 2}` to the survivor, mapping `|0..0>, |1..1>, |+..>, |-..>` to
/// `|0>, |1>, |+>, |->`. The ancilla must be unentangled from everything
/// else after the measurement.
pub fn ghz_reduce<R: Rng + ?Sized>(
    st: &mut SparseState,
    ancilla: &[usize],
    rng: &mut R,
) -> Result<(Qubit, BitVec)> {
    check_logical_span(st, ancilla)?;
    let w = st.measure_hadamard(&ancilla[1..], rng)?;
    if w.parity() {
        st.apply_gate(Gate::Z(ancilla[0]))?;
    }
    let q = Qubit::from_state(&st.restrict(&ancilla[..1])?)?;
    Ok((q, w))
}

/// Every basis state must hold the ancilla at all-zeros or all-ones.
pub fn check_logical_span(st: &SparseState, ancilla: &[usize]) -> Result<()> {
    for (k, _) in st.iter() {
        let first = k.get(ancilla[0]);
        if ancilla.iter().any(|&q| k.get(q) != first) {
            return Err(QsimError::IllegalAncilla);
        }
    }
    Ok(())
}
