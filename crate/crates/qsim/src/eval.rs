//! Constant-depth coherent evaluation of an encoded function.
//!
//! Every output bit of the encoding is either `T + r` with `T` a product of
//! at most three preimage bits, or the xor of at most three preimage bits.
//! Both fit a fixed six-layer schedule over `{X, CNOT, CCNOT}`:
//!
//! | layer | degree-3 term         | degree <= 2 term    | chain          |
//! |-------|-----------------------|---------------------|----------------|
//! | 1     | `a1 ^= f0 f1`         | `out ^= T`          | `out ^= in0`   |
//! | 2     | `a2 ^= a1 f2`         |                     | `out ^= in1`   |
//! | 3     | `out ^= a2`           |                     | `out ^= in2`   |
//! | 4     | `out ^= r`            | `out ^= r`          |                |
//! | 5     | `a2 ^= a1 f2`         |                     |                |
//! | 6     | `a1 ^= f0 f1`         |                     |                |
//!
//! Gates in a layer must touch distinct qubits, so each preimage bit is held
//! in as many copies (a GHZ block) as its largest per-layer use count.

use std::ops::Range;

use dpoq_core::randenc::{EncodedFunction, OutputGate};
use dpoq_core::BitVec;

use crate::error::{QsimError, Result};
use crate::meter::DepthMeter;
use crate::state::{Gate, SparseState};

pub const EVAL_LAYERS: usize = 6;

/// Copies per preimage bit and the resulting block layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replication {
    copies: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl Replication {
    pub fn new(copies: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(copies.len());
        let mut total = 0;
        for &c in &copies {
            offsets.push(total);
            total += c;
        }
        Replication { copies, offsets, total }
    }

    pub fn copies(&self) -> &[usize] {
        &self.copies
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i] + self.copies[i]
    }

    pub fn blocks(&self, base: usize) -> Vec<Vec<usize>> {
        (0..self.copies.len())
            .map(|i| self.block(i).map(|q| base + q).collect())
            .collect()
    }

    /// Each bit repeated over its block.
    pub fn replicate(&self, bits: &BitVec) -> BitVec {
        let mut out = BitVec::with_capacity(self.total);
        for (i, &c) in self.copies.iter().enumerate() {
            let b = bits.get(i);
            for _ in 0..c {
                out.push(b);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
enum Operand {
    /// Some copy of preimage bit `bit`; copies are assigned per layer.
    Pre { bit: usize },
    Out(usize),
    Anc(usize),
}

#[derive(Clone, Copy, Debug)]
enum AbstractGate {
    X(Operand),
    Cnot(Operand, Operand),
    Ccnot(Operand, Operand, Operand),
}

/// The six-layer circuit on `preimage copies | output | ancillas`.
#[derive(Clone, Debug)]
pub struct EvalCircuit {
    pub replication: Replication,
    pub out_base: usize,
    pub out_len: usize,
    pub anc_base: usize,
    pub anc_len: usize,
    pub layers: Vec<Vec<Gate>>,
}

impl EvalCircuit {
    /// Circuit with the minimal replication for the schedule.
    pub fn plan(f: &EncodedFunction) -> Self {
        let abs = abstract_layers(&f.output_gates());
        let copies = required_copies(&abs, f.preimage_len());
        Self::assemble(f, &abs, Replication::new(copies))
    }

    /// Circuit over a given replication; fails if some bit has too few copies.
    pub fn with_replication(f: &EncodedFunction, copies: &[usize]) -> Result<Self> {
        let abs = abstract_layers(&f.output_gates());
        let need = required_copies(&abs, f.preimage_len());
        if copies.len() != need.len() {
            return Err(QsimError::Width {
                expected: need.len(),
                got: copies.len(),
            });
        }
        for (bit, (&n, &h)) in need.iter().zip(copies).enumerate() {
            if h < n {
                return Err(QsimError::FanoutInsufficient {
                    bit,
                    needed: n,
                    have: h,
                });
            }
        }
        Ok(Self::assemble(f, &abs, Replication::new(copies.to_vec())))
    }

    fn assemble(f: &EncodedFunction, abs: &[Vec<AbstractGate>], replication: Replication) -> Self {
        let out_base = replication.total();
        let out_len = f.output_len();
        let anc_base = out_base + out_len;
        let anc_len = abs
            .iter()
            .flatten()
            .filter_map(|g| match g {
                AbstractGate::Ccnot(_, _, Operand::Anc(a)) => Some(a + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut layers = Vec::with_capacity(EVAL_LAYERS);
        for layer in abs {
            let mut next_copy = vec![0usize; f.preimage_len()];
            let mut q = |op: Operand| match op {
                Operand::Pre { bit } => {
                    let c = next_copy[bit];
                    next_copy[bit] += 1;
                    replication.block(bit).start + c
                }
                Operand::Out(o) => out_base + o,
                Operand::Anc(a) => anc_base + a,
            };
            let gates = layer
                .iter()
                .map(|g| match *g {
                    AbstractGate::X(t) => Gate::X(q(t)),
                    AbstractGate::Cnot(c, t) => Gate::Cnot {
                        control: q(c),
                        target: q(t),
                    },
                    AbstractGate::Ccnot(a, b, t) => Gate::Ccnot {
                        c0: q(a),
                        c1: q(b),
                        target: q(t),
                    },
                })
                .collect();
            layers.push(gates);
        }
        EvalCircuit {
            replication,
            out_base,
            out_len,
            anc_base,
            anc_len,
            layers,
        }
    }

    pub fn width(&self) -> usize {
        self.anc_base + self.anc_len
    }

    pub fn output_qubits(&self) -> Vec<usize> {
        (self.out_base..self.out_base + self.out_len).collect()
    }

    pub fn record(&self, meter: &mut DepthMeter) {
        for (i, layer) in self.layers.iter().enumerate() {
            meter.unitary(&format!("eval: layer {}", i + 1), layer);
        }
    }
}

fn abstract_layers(gates: &[OutputGate]) -> Vec<Vec<AbstractGate>> {
    let mut layers: Vec<Vec<AbstractGate>> = vec![Vec::new(); EVAL_LAYERS];
    let mut anc = 0;
    let pre = |bit| Operand::Pre { bit };
    for (o, g) in gates.iter().enumerate() {
        let out = Operand::Out(o);
        match g {
            OutputGate::Term { factors, mask } => {
                match factors[..] {
                    [] => layers[0].push(AbstractGate::X(out)),
                    [a] => layers[0].push(AbstractGate::Cnot(pre(a), out)),
                    [a, b] => layers[0].push(AbstractGate::Ccnot(pre(a), pre(b), out)),
                    [a, b, c] => {
                        let (a1, a2) = (Operand::Anc(anc), Operand::Anc(anc + 1));
                        anc += 2;
                        layers[0].push(AbstractGate::Ccnot(pre(a), pre(b), a1));
                        layers[1].push(AbstractGate::Ccnot(a1, pre(c), a2));
                        layers[2].push(AbstractGate::Cnot(a2, out));
                        layers[4].push(AbstractGate::Ccnot(a1, pre(c), a2));
                        layers[5].push(AbstractGate::Ccnot(pre(a), pre(b), a1));
                    }
                    _ => unreachable!("monomials have degree at most 3"),
                }
                layers[3].push(AbstractGate::Cnot(pre(*mask), out));
            }
            OutputGate::Chain { inputs } => {
                for (i, &b) in inputs.iter().enumerate() {
                    layers[i].push(AbstractGate::Cnot(pre(b), out));
                }
            }
        }
    }
    layers
}

fn required_copies(layers: &[Vec<AbstractGate>], n: usize) -> Vec<usize> {
    let mut need = vec![1usize; n];
    for layer in layers {
        let mut uses = vec![0usize; n];
        for g in layer {
            let ops: &[Operand] = match g {
                AbstractGate::X(a) => std::slice::from_ref(a),
                AbstractGate::Cnot(a, b) => &[*a, *b][..],
                AbstractGate::Ccnot(a, b, c) => &[*a, *b, *c][..],
            };
            for op in ops.iter() {
                if let Operand::Pre { bit } = op {
                    uses[*bit] += 1;
                }
            }
        }
        for (n, u) in need.iter_mut().zip(uses) {
            *n = (*n).max(u);
        }
    }
    need
}

/// Runs the six evaluation layers.
pub fn coherent_eval_hat(st: &mut SparseState, circuit: &EvalCircuit, meter: &mut DepthMeter) -> Result<()> {
    for (i, layer) in circuit.layers.iter().enumerate() {
        st.apply_layer(layer)?;
        meter.unitary(&format!("eval: layer {}", i + 1), layer);
    }
    Ok(())
}
