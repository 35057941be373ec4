//! Sparse statevector keyed by basis bit-strings.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use dpoq_core::BitVec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QsimError, Result};

pub const DEFAULT_SUPPORT_BOUND: usize = 1 << 16;
pub const NORM_TOLERANCE: f64 = 1e-9;
const PRUNE: f64 = 1e-24;
/// Largest support for which Hadamard-basis measurement tracks pairwise
/// distances instead of rehashing keys.
const PAIRWISE_LIMIT: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    Z(usize),
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Ccnot { c0: usize, c1: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::Z(q) | Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => {
                vec![q]
            }
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Ccnot { c0, c1, target } => vec![c0, c1, target],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "X",
            Gate::Z(_) => "Z",
            Gate::H(_) => "H",
            Gate::Rx(..) => "RX",
            Gate::Ry(..) => "RY",
            Gate::Rz(..) => "RZ",
            Gate::Cnot { .. } => "CNOT",
            Gate::Ccnot { .. } => "CCNOT",
            Gate::Cz(..) => "CZ",
        }
    }

    /// Permutes basis states without changing amplitudes.
    fn is_permutation(&self) -> bool {
        matches!(self, Gate::X(_) | Gate::Cnot { .. } | Gate::Ccnot { .. })
    }

    fn is_diagonal(&self) -> bool {
        matches!(self, Gate::Z(_) | Gate::Rz(..) | Gate::Cz(..))
    }
}

#[derive(Clone, Debug)]
pub struct SparseState {
    num_qubits: usize,
    amps: BTreeMap<BitVec, Complex64>,
    bound: usize,
}

impl SparseState {
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(BitVec::zeros(num_qubits))
    }

    pub fn basis(key: BitVec) -> Self {
        let mut amps = BTreeMap::new();
        let n = key.len();
        amps.insert(key, Complex64::new(1.0, 0.0));
        SparseState {
            num_qubits: n,
            amps,
            bound: DEFAULT_SUPPORT_BOUND,
        }
    }

    /// Builds a state from explicit amplitudes; duplicate keys add.
    pub fn from_amplitudes(num_qubits: usize, entries: impl IntoIterator<Item = (BitVec, Complex64)>) -> Result<Self> {
        let mut amps: BTreeMap<BitVec, Complex64> = BTreeMap::new();
        for (k, a) in entries {
            if k.len() != num_qubits {
                return Err(QsimError::Width {
                    expected: num_qubits,
                    got: k.len(),
                });
            }
            *amps.entry(k).or_default() += a;
        }
        amps.retain(|_, a| a.norm_sqr() > PRUNE);
        let st = SparseState {
            num_qubits,
            amps,
            bound: DEFAULT_SUPPORT_BOUND,
        };
        st.check_bound()?;
        Ok(st)
    }

    /// Equal-weight superposition of the given distinct basis states.
    pub fn uniform(num_qubits: usize, keys: &[BitVec]) -> Result<Self> {
        let a = Complex64::new(1.0 / (keys.len() as f64).sqrt(), 0.0);
        Self::from_amplitudes(num_qubits, keys.iter().map(|k| (k.clone(), a)))
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn support(&self) -> usize {
        self.amps.len()
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitVec, &Complex64)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, key: &BitVec) -> Complex64 {
        self.amps.get(key).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn inner(&self, other: &SparseState) -> Complex64 {
        self.amps
            .iter()
            .map(|(k, a)| a.conj() * other.amplitude(k))
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SparseState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Extends the register with `extra` qubits in `|0>`.
    pub fn extend_zero(&mut self, extra: usize) {
        let amps = std::mem::take(&mut self.amps);
        for (mut k, a) in amps {
            k.extend_from(&BitVec::zeros(extra));
            self.amps.insert(k, a);
        }
        self.num_qubits += extra;
    }

    /// Tensor product `self (x) other`, with `other` on the high indices.
    pub fn tensor(&self, other: &SparseState) -> Result<SparseState> {
        let mut out = Vec::with_capacity(self.support() * other.support());
        for (k1, a1) in &self.amps {
            for (k2, a2) in &other.amps {
                out.push((BitVec::concat(&[k1, k2]), a1 * a2));
            }
        }
        Ok(SparseState::from_amplitudes(self.num_qubits + other.num_qubits, out)?.with_bound(self.bound))
    }

    /// Keeps only the listed qubits; they must be unentangled with the rest,
    /// i.e. every other qubit must be a fixed basis value across the support.
    pub fn restrict(&self, keep: &[usize]) -> Result<SparseState> {
        let mut out: Vec<(BitVec, Complex64)> = Vec::with_capacity(self.support());
        let mut rest: Option<BitVec> = None;
        let others: Vec<usize> = (0..self.num_qubits).filter(|q| !keep.contains(q)).collect();
        for (k, a) in &self.amps {
            let r: BitVec = others.iter().map(|&q| k.get(q)).collect();
            match &rest {
                None => rest = Some(r),
                Some(prev) if *prev != r => {
                    return Err(QsimError::Entangled);
                }
                _ => {}
            }
            out.push((keep.iter().map(|&q| k.get(q)).collect(), *a));
        }
        SparseState::from_amplitudes(keep.len(), out)
    }

    fn check_bound(&self) -> Result<()> {
        if self.amps.len() > self.bound {
            return Err(QsimError::SupportOverflow {
                bound: self.bound,
                needed: self.amps.len(),
            });
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(QsimError::QubitOutOfRange {
                qubit: q,
                width: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Applies one layer of gates acting on pairwise disjoint qubits.
    pub fn apply_layer(&mut self, gates: &[Gate]) -> Result<()> {
        let mut used = BitVec::zeros(self.num_qubits);
        for g in gates {
            for q in g.qubits() {
                self.check_qubit(q)?;
                if used.get(q) {
                    return Err(QsimError::OverlappingTargets(q));
                }
                used.set(q, true);
            }
        }
        let perms: Vec<&Gate> = gates.iter().filter(|g| g.is_permutation()).collect();
        if !perms.is_empty() {
            let amps = std::mem::take(&mut self.amps);
            for (mut k, a) in amps {
                // Gates in a layer touch disjoint qubits, so controls read
                // values no other gate in the layer writes.
                for g in &perms {
                    match **g {
                        Gate::X(q) => k.flip(q),
                        Gate::Cnot { control, target } => {
                            if k.get(control) {
                                k.flip(target)
                            }
                        }
                        Gate::Ccnot { c0, c1, target } => {
                            if k.get(c0) && k.get(c1) {
                                k.flip(target)
                            }
                        }
                        _ => unreachable!(),
                    }
                }
                self.amps.insert(k, a);
            }
        }
        let diags: Vec<&Gate> = gates.iter().filter(|g| g.is_diagonal()).collect();
        if !diags.is_empty() {
            for (k, a) in self.amps.iter_mut() {
                for g in &diags {
                    match **g {
                        Gate::Z(q) => {
                            if k.get(q) {
                                *a = -*a
                            }
                        }
                        Gate::Cz(p, q) => {
                            if k.get(p) && k.get(q) {
                                *a = -*a
                            }
                        }
                        Gate::Rz(q, t) => {
                            let s = if k.get(q) { 0.5 } else { -0.5 };
                            *a *= Complex64::from_polar(1.0, s * t);
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
        for g in gates {
            let (q, m) = match *g {
                Gate::H(q) => (q, hadamard()),
                Gate::Rx(q, t) => (q, rx(t)),
                Gate::Ry(q, t) => (q, ry(t)),
                _ => continue,
            };
            self.apply_single(q, m)?;
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: Gate) -> Result<()> {
        self.apply_layer(&[g])
    }

    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        let mut out: HashMap<BitVec, Complex64> = HashMap::with_capacity(2 * self.amps.len());
        for (k, a) in &self.amps {
            let b = k.get(q) as usize;
            for v in 0..2 {
                let c = m[v][b];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let mut key = k.clone();
                key.set(q, v == 1);
                *out.entry(key).or_default() += c * a;
            }
        }
        out.retain(|_, a| a.norm_sqr() > PRUNE);
        if out.len() > self.bound {
            return Err(QsimError::SupportOverflow {
                bound: self.bound,
                needed: out.len(),
            });
        }
        self.amps = out.into_iter().collect();
        Ok(())
    }

    fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in self.amps.values_mut() {
                *a /= n;
            }
        }
    }

    /// Computational-basis measurement of `qubits`; returns outcomes in the
    /// given order and collapses the state.
    pub fn measure_computational<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<BitVec> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let u: f64 = rng.gen::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, a) in &self.amps {
            acc += a.norm_sqr();
            if acc >= u {
                chosen = Some(k.clone());
                break;
            }
        }
        let chosen = chosen.unwrap_or_else(|| self.amps.keys().next_back().expect("nonempty").clone());
        let outcome: BitVec = qubits.iter().map(|&q| chosen.get(q)).collect();
        self.amps
            .retain(|k, _| qubits.iter().zip(outcome.iter()).all(|(&q, b)| k.get(q) == b));
        self.renormalize();
        Ok(outcome)
    }

    /// Applies `H` to each of `qubits` and measures them, one qubit at a time.
    /// Measured qubits are left in the basis state of their outcome.
    pub fn measure_hadamard<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<BitVec> {
        let mut seen = BitVec::zeros(self.num_qubits);
        for &q in qubits {
            self.check_qubit(q)?;
            if seen.get(q) {
                return Err(QsimError::OverlappingTargets(q));
            }
            seen.set(q, true);
        }
        if self.amps.len() <= PAIRWISE_LIMIT {
            self.measure_hadamard_pairwise(qubits, rng)
        } else {
            self.measure_hadamard_hashed(qubits, rng)
        }
    }

    /// Groups of basis states that agree on every qubit not yet measured are
    /// merged; pairwise Hamming distances over the unmeasured qubits are
    /// maintained so a merge is detected when a distance reaches zero.
    fn measure_hadamard_pairwise<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<BitVec> {
        let (keys, mut amps): (Vec<BitVec>, Vec<Complex64>) = std::mem::take(&mut self.amps).into_iter().unzip();
        let s = keys.len();
        let mut alive = vec![true; s];
        let mut dist = vec![0u32; s * s];
        for a in 0..s {
            for b in a + 1..s {
                let d = keys[a].hamming(&keys[b]) as u32;
                dist[a * s + b] = d;
                dist[b * s + a] = d;
            }
        }
        let mut outcome = BitVec::with_capacity(qubits.len());
        for &q in qubits {
            let live: Vec<usize> = (0..s).filter(|&a| alive[a]).collect();
            let bit: Vec<bool> = keys.iter().map(|k| k.get(q)).collect();
            let mut partner: Vec<Option<usize>> = vec![None; s];
            for (ia, &a) in live.iter().enumerate() {
                for &b in &live[ia + 1..] {
                    if dist[a * s + b] == 1 && bit[a] != bit[b] {
                        partner[a] = Some(b);
                        partner[b] = Some(a);
                    }
                }
            }
            let sign = |a: usize, d: bool| if d && bit[a] { -1.0 } else { 1.0 };
            let mut prob = [0.0f64; 2];
            for (d, p) in prob.iter_mut().enumerate() {
                let d = d == 1;
                for &a in &live {
                    match partner[a] {
                        Some(b) if b < a => {}
                        Some(b) => *p += (amps[a] * sign(a, d) + amps[b] * sign(b, d)).norm_sqr() / 2.0,
                        None => *p += amps[a].norm_sqr() / 2.0,
                    }
                }
            }
            let d = rng.gen::<f64>() * (prob[0] + prob[1]) >= prob[0];
            let scale = FRAC_1_SQRT_2 / prob[d as usize].sqrt();
            for &a in &live {
                match partner[a] {
                    Some(b) if b < a => alive[a] = false,
                    Some(b) => amps[a] = (amps[a] * sign(a, d) + amps[b] * sign(b, d)) * scale,
                    None => amps[a] *= sign(a, d) * scale,
                }
            }
            for &a in &live {
                if alive[a] && amps[a].norm_sqr() <= PRUNE {
                    alive[a] = false;
                }
            }
            for (ia, &a) in live.iter().enumerate() {
                for &b in &live[ia + 1..] {
                    if bit[a] != bit[b] {
                        dist[a * s + b] -= 1;
                        dist[b * s + a] -= 1;
                    }
                }
            }
            outcome.push(d);
        }
        for a in 0..s {
            if alive[a] {
                let mut k = keys[a].clone();
                for (&q, d) in qubits.iter().zip(outcome.iter()) {
                    k.set(q, d);
                }
                self.amps.insert(k, amps[a]);
            }
        }
        self.renormalize();
        Ok(outcome)
    }

    fn measure_hadamard_hashed<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<BitVec> {
        let mut outcome = BitVec::with_capacity(qubits.len());
        for &q in qubits {
            let mut pairs: HashMap<BitVec, [Complex64; 2]> = HashMap::with_capacity(self.amps.len());
            for (k, a) in std::mem::take(&mut self.amps) {
                let b = k.get(q) as usize;
                let mut key = k;
                key.set(q, false);
                pairs.entry(key).or_default()[b] += a;
            }
            let combine = |p: &[Complex64; 2], d: bool| if d { p[0] - p[1] } else { p[0] + p[1] };
            let p0: f64 = pairs.values().map(|p| combine(p, false).norm_sqr() / 2.0).sum();
            let p1: f64 = pairs.values().map(|p| combine(p, true).norm_sqr() / 2.0).sum();
            let d = rng.gen::<f64>() * (p0 + p1) >= p0;
            for (mut k, p) in pairs {
                let a = combine(&p, d) * FRAC_1_SQRT_2;
                if a.norm_sqr() > PRUNE {
                    k.set(q, d);
                    self.amps.insert(k, a);
                }
            }
            self.renormalize();
            outcome.push(d);
        }
        Ok(outcome)
    }

    /// Debug dump: one `<bitstring> <re> <im>` line per basis state.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, a) in &self.amps {
            let _ = writeln!(s, "{k} {:.12} {:.12}", a.re, a.im);
        }
        s
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn hadamard() -> [[Complex64; 2]; 2] {
    let h = FRAC_1_SQRT_2;
    [[c(h), c(h)], [c(h), c(-h)]]
}

pub fn rx(t: f64) -> [[Complex64; 2]; 2] {
    let (s, co) = (t / 2.0).sin_cos();
    let mi = Complex64::new(0.0, -s);
    [[c(co), mi], [mi, c(co)]]
}

pub fn ry(t: f64) -> [[Complex64; 2]; 2] {
    let (s, co) = (t / 2.0).sin_cos();
    [[c(co), c(-s)], [c(s), c(co)]]
}
