//! The honest prover's quantum side: commit, and answer preimage, equation
//! and Bell challenges.
//!
//! Two interchangeable engines produce the post-commit state. The full engine
//! simulates the superposition over every preimage through cat-state
//! preparation, coherent evaluation and measurement of the image register;
//! it is only feasible on micro instances. The collapse-on-commit engine
//! samples one preimage, computes its image classically and writes down the
//! two-element superposition over the image's preimages directly, using the
//! public brute-force claw table and randomness reconstruction. Both record
//! the same meter events.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use dpoq_core::bp::anf_to_bp;
use dpoq_core::randenc::EncodedFunction;
use dpoq_core::tcf::TcfKey;
use dpoq_core::BitVec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QsimError, Result};
use crate::eval::{coherent_eval_hat, EvalCircuit};
use crate::ghz::{
    check_logical_span, fold_blocks, measure_rotated, prepare_cat_blocks, record_ghz_layers,
    unreplicate, Qubit,
};
use crate::meter::DepthMeter;
use crate::state::{Gate, SparseState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Shortcut,
    Full,
}

/// Encoded function of a key, its evaluation circuit and the public claw table.
#[derive(Clone, Debug)]
pub struct ProverCircuit {
    key: TcfKey,
    f: EncodedFunction,
    eval: EvalCircuit,
    claws: HashMap<u64, (u64, u64)>,
}

pub fn encode_key(key: &TcfKey) -> Result<EncodedFunction> {
    let bps: Vec<_> = key.function_anf()?.iter().map(anf_to_bp).collect();
    Ok(EncodedFunction::new(&bps)?)
}

impl ProverCircuit {
    pub fn new(key: &TcfKey) -> Result<Self> {
        let f = encode_key(key)?;
        let eval = EvalCircuit::plan(&f);
        let claws = key
            .claws_bruteforce()?
            .into_iter()
            .map(|(y, a, b)| (y, (a, b)))
            .collect();
        Ok(ProverCircuit {
            key: key.clone(),
            f,
            eval,
            claws,
        })
    }

    pub fn key(&self) -> &TcfKey {
        &self.key
    }

    pub fn function(&self) -> &EncodedFunction {
        &self.f
    }

    pub fn eval_circuit(&self) -> &EvalCircuit {
        &self.eval
    }

    /// Qubits in the replicated preimage register.
    pub fn replicated_width(&self) -> usize {
        self.eval.replication.total()
    }

    /// Qubits in the Bell ancilla: one per preimage bit.
    pub fn ancilla_width(&self) -> usize {
        self.f.preimage_len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.eval.replication.copies().to_vec()
    }

    fn record_prefix(&self, meter: &mut DepthMeter, with_ancilla: bool) {
        let data = self.replicated_width() + if with_ancilla { self.ancilla_width() } else { 0 };
        let blocks = self.f.preimage_len() + with_ancilla as usize;
        record_ghz_layers(meter, data, data - blocks);
        self.eval.record(meter);
    }

    fn record_commit(meter: &mut DepthMeter, outputs: usize) {
        meter.measurement("commit: image register", outputs);
        meter.interleave("commit: report image");
    }

    pub fn commit<R: Rng + ?Sized>(&self, engine: Engine, with_ancilla: bool, rng: &mut R) -> Result<Commit> {
        match engine {
            Engine::Shortcut => self.commit_shortcut(with_ancilla, rng),
            Engine::Full => self.commit_full(with_ancilla, rng),
        }
    }

    /// Samples a uniform preimage and builds the post-commit state directly.
    pub fn commit_shortcut<R: Rng + ?Sized>(&self, with_ancilla: bool, rng: &mut R) -> Result<Commit> {
        let mut meter = DepthMeter::new();
        self.record_prefix(&mut meter, with_ancilla);
        let m = self.f.num_inputs();
        let x = BitVec::random(m, rng);
        let pre = self.f.random_preimage(&x, rng);
        let y_hat = self.f.apply_hat(&pre)?;
        Self::record_commit(&mut meter, self.f.output_len());
        let post = self.collapse(&y_hat, with_ancilla)?;
        if let Some(PostCommit { claw: Some((a, b)), .. }) = &post {
            debug_assert!(pre == *a || pre == *b);
        }
        Ok(Commit { y_hat, meter, post })
    }

    /// The post-commit state for image `y_hat`: the uniform superposition
    /// of its two replicated preimages (times a GHZ ancilla if requested).
    /// `None` if `y_hat` has no claw.
    pub fn collapse(&self, y_hat: &BitVec, with_ancilla: bool) -> Result<Option<PostCommit>> {
        let m = self.f.num_inputs();
        let y = self.f.decode(y_hat)?;
        let Some(&(x0, x1)) = self.claws.get(&y) else {
            return Ok(None);
        };
        let pre0 = self.f.reconstruct(&BitVec::from_u64(x0, m), y_hat)?;
        let pre1 = self.f.reconstruct(&BitVec::from_u64(x1, m), y_hat)?;
        let rep = &self.eval.replication;
        let r = rep.total();
        let a = if with_ancilla { self.ancilla_width() } else { 0 };
        let mut keys = Vec::with_capacity(4);
        for p in [&pre0, &pre1] {
            let base = rep.replicate(p);
            if with_ancilla {
                for fill in [false, true] {
                    let anc = if fill { BitVec::ones(a) } else { BitVec::zeros(a) };
                    keys.push(BitVec::concat(&[&base, &anc]));
                }
            } else {
                keys.push(base);
            }
        }
        let state = SparseState::uniform(r + a, &keys)?;
        Ok(Some(PostCommit {
            state,
            blocks: rep.blocks(0),
            ancilla: (r..r + a).collect(),
            claw: Some((pre0, pre1)),
        }))
    }

    /// Full superposition over all preimages; micro instances only.
    pub fn commit_full<R: Rng + ?Sized>(&self, with_ancilla: bool, rng: &mut R) -> Result<Commit> {
        let mut meter = DepthMeter::new();
        let base = self.eval.width();
        let a = if with_ancilla { self.ancilla_width() } else { 0 };
        let scratch = base + a;
        let mut st = SparseState::zero(base + a + 1);
        let mut blocks = self.eval.replication.blocks(0);
        let ancilla: Vec<usize> = (base..base + a).collect();
        if with_ancilla {
            blocks.push(ancilla.clone());
        }
        prepare_cat_blocks(&mut st, &blocks, scratch, rng)?;
        if with_ancilla {
            blocks.pop();
        }
        record_ghz_layers(
            &mut meter,
            self.replicated_width() + a,
            self.replicated_width() + a - self.f.preimage_len() - with_ancilla as usize,
        );
        coherent_eval_hat(&mut st, &self.eval, &mut meter)?;
        let y_hat = st.measure_computational(&self.eval.output_qubits(), rng)?;
        Self::record_commit(&mut meter, self.f.output_len());
        let y = self.f.decode(&y_hat)?;
        let post = self.claws.contains_key(&y).then(|| PostCommit {
            state: st,
            blocks,
            ancilla,
            claw: None,
        });
        Ok(Commit { y_hat, meter, post })
    }
}

#[derive(Clone, Debug)]
pub struct Commit {
    pub y_hat: BitVec,
    pub meter: DepthMeter,
    /// `None` for degenerate rounds.
    pub post: Option<PostCommit>,
}

/// State after the image measurement: an equal superposition of the two
/// replicated preimages, optionally with a GHZ ancilla.
#[derive(Clone, Debug)]
pub struct PostCommit {
    pub state: SparseState,
    /// Qubits holding the copies of each preimage bit.
    pub blocks: Vec<Vec<usize>>,
    pub ancilla: Vec<usize>,
    /// The two preimages, when the engine knows them.
    pub claw: Option<(BitVec, BitVec)>,
}

impl PostCommit {
    fn register(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Computational measurement of the preimage register.
    pub fn preimage_test<R: Rng + ?Sized>(mut self, rng: &mut R, meter: &mut DepthMeter) -> Result<BitVec> {
        let bits = self.state.measure_computational(&self.register(), rng)?;
        meter.measurement("preimage: measure", bits.len());
        meter.interleave("preimage: report");
        unreplicate(&bits, &self.sizes())
    }

    /// Hadamard-basis measurement of the preimage register, folded per block.
    pub fn equation_test<R: Rng + ?Sized>(mut self, rng: &mut R, meter: &mut DepthMeter) -> Result<BitVec> {
        let reg = self.register();
        let bits = self.state.measure_hadamard(&reg, rng)?;
        meter.unitary_census("equation: H", [("H".to_string(), reg.len())].into());
        meter.measurement("equation: measure", reg.len());
        meter.interleave("equation: report");
        fold_blocks(&bits, &self.sizes())
    }

    /// CZ phase injection controlled by `v`, then one Hadamard-basis
    /// measurement of the preimage register and all ancilla qubits but the
    /// first. Returns the folded outcome and the reduced ancilla qubit.
    pub fn bell_measure<R: Rng + ?Sized>(mut self, v: &BitVec, rng: &mut R, meter: &mut DepthMeter) -> Result<(BitVec, BellPending)> {
        let gates = bell_phase_gates(&self.blocks, &self.ancilla, v)?;
        self.state.apply_layer(&gates)?;
        meter.unitary("bell: CZ", &gates);
        check_logical_span(&self.state, &self.ancilla)?;
        let mut reg = self.register();
        let nreg = reg.len();
        reg.extend_from_slice(&self.ancilla[1..]);
        let bits = self.state.measure_hadamard(&reg, rng)?;
        meter.unitary_census("bell: H", [("H".to_string(), reg.len())].into());
        meter.measurement("bell: measure", reg.len());
        meter.interleave("bell: report d");
        let d = fold_blocks(&bits.slice(0..nreg), &self.sizes())?;
        let w = bits.slice(nreg..bits.len());
        let q = Qubit::from_state(&self.state.restrict(&self.ancilla[..1])?)?;
        Ok((d, BellPending { qubit: q, w }))
    }
}

/// One CZ per `v_i = 1` between the first copy of preimage bit `i` and
/// ancilla qubit `i`.
pub fn bell_phase_gates(blocks: &[Vec<usize>], ancilla: &[usize], v: &BitVec) -> Result<Vec<Gate>> {
    if v.len() != blocks.len() || ancilla.len() < blocks.len() {
        return Err(QsimError::Width {
            expected: blocks.len(),
            got: v.len(),
        });
    }
    Ok(v.ones_indices().map(|i| Gate::Cz(blocks[i][0], ancilla[i])).collect())
}

/// Applies the phase-injection layer to `st`.
pub fn bell_phase_inject(st: &mut SparseState, blocks: &[Vec<usize>], ancilla: &[usize], v: &BitVec, meter: &mut DepthMeter) -> Result<()> {
    let gates = bell_phase_gates(blocks, ancilla, v)?;
    st.apply_layer(&gates)?;
    meter.unitary("bell: CZ", &gates);
    Ok(())
}

/// The surviving ancilla qubit, before the parity correction.
#[derive(Clone, Debug)]
pub struct BellPending {
    pub qubit: Qubit,
    pub w: BitVec,
}

impl BellPending {
    /// The qubit the verifier reasons about. Phase injection through CZ on a
    /// GHZ ancilla leaves the Hadamard image of it, which the extra `Z` and
    /// the quarter-turn offset in [`BellPending::rotation_angle`] undo.
    pub fn corrected(&self) -> Qubit {
        if self.w.parity() {
            self.qubit
        } else {
            self.qubit.z()
        }
    }

    /// Rotation applied before measuring in the `phi` basis.
    pub fn rotation_angle(phi: f64) -> f64 {
        phi - FRAC_PI_2
    }

    /// Probability of each outcome for the verifier's `phi`.
    pub fn outcome_probabilities(&self, phi: f64) -> [f64; 2] {
        self.corrected().rotated_probabilities(Self::rotation_angle(phi))
    }

    /// `Z^{|w|+1}`, rotation and measurement.
    pub fn finish<R: Rng + ?Sized>(self, phi: f64, rng: &mut R, meter: &mut DepthMeter) -> bool {
        meter.unitary("bell: Z correction", &[Gate::Z(0)]);
        let bit = measure_rotated(&self.corrected(), Self::rotation_angle(phi), rng, meter);
        meter.interleave("bell: report bit");
        bit
    }
}

/// Amplitudes helper used by tests and the verifier's analytic checks.
pub fn logical_qubit(a: f64, b: f64) -> Qubit {
    Qubit([Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
}
