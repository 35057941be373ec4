//! Barrington's width-5 permutation programs and their conversion to mod-2
//! counting branching programs.
//!
//! A program is a list of instructions `(selector, pi1, pi0)`; the program
//! permutation is the composition of the selected permutations, applying the
//! first instruction first. A program *computes* `f` with respect to a 5-cycle
//! `sigma` when it yields `sigma` on `f(x) = 1` and the identity otherwise.
//!
//! Length accounting: NOT is absorbed into the last instruction, AND and OR
//! cost a factor 4, and XOR (built as `AND(NAND(a,b), OR(a,b))`) a factor 16.
//! The length is therefore at most `4^w` where `w` is the weighted depth
//! with XOR gates counted twice; for circuits over AND/OR/NOT this is
//! `4^depth`.

use std::collections::HashMap;

use crate::bp::{Edge, Label, Mod2Bp};
use crate::circuits::{Circuit, GateKind, Wire};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 6;

/// A permutation of `{0,..,4}` as an image table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm5(pub [u8; 5]);

impl Perm5 {
    pub const ID: Perm5 = Perm5([0, 1, 2, 3, 4]);

    #[inline]
    pub fn apply(self, i: u8) -> u8 {
        self.0[i as usize]
    }

    /// `self` followed by `next`.
    pub fn then(self, next: Perm5) -> Perm5 {
        let mut out = [0u8; 5];
        for (i, o) in out.iter_mut().enumerate() {
            *o = next.apply(self.0[i]);
        }
        Perm5(out)
    }

    pub fn inverse(self) -> Perm5 {
        let mut out = [0u8; 5];
        for i in 0..5u8 {
            out[self.0[i as usize] as usize] = i;
        }
        Perm5(out)
    }

    pub fn is_five_cycle(self) -> bool {
        let mut i = 0u8;
        for step in 1..=5 {
            i = self.apply(i);
            if i == 0 {
                return step == 5;
            }
        }
        false
    }

    pub fn all() -> Vec<Perm5> {
        let mut out = Vec::with_capacity(120);
        let mut p = [0u8, 1, 2, 3, 4];
        permute(&mut p, 0, &mut out);
        out.sort();
        out
    }
}

fn permute(p: &mut [u8; 5], k: usize, out: &mut Vec<Perm5>) {
    if k == 5 {
        out.push(Perm5(*p));
        return;
    }
    for i in k..5 {
        p.swap(k, i);
        permute(p, k + 1, out);
        p.swap(k, i);
    }
}

/// The canonical 5-cycle `0 -> 1 -> 2 -> 3 -> 4 -> 0`.
pub const SIGMA: Perm5 = Perm5([1, 2, 3, 4, 0]);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    Var(usize),
    Const(bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Instruction {
    pub select: Selector,
    pub on_true: Perm5,
    pub on_false: Perm5,
}

impl Instruction {
    fn pick(&self, x: &[bool]) -> Perm5 {
        let bit = match self.select {
            Selector::Var(i) => x[i],
            Selector::Const(c) => c,
        };
        if bit {
            self.on_true
        } else {
            self.on_false
        }
    }

    fn then_const(mut self, p: Perm5) -> Instruction {
        self.on_true = self.on_true.then(p);
        self.on_false = self.on_false.then(p);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationProgram {
    pub num_vars: usize,
    pub sigma: Perm5,
    pub instructions: Vec<Instruction>,
}

impl PermutationProgram {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn permutation(&self, x: &[bool]) -> Perm5 {
        self.instructions
            .iter()
            .fold(Perm5::ID, |acc, ins| acc.then(ins.pick(x)))
    }

    /// Layered counting BP: layer `k` holds five pins, instruction `k` wires
    /// pin `p` to `pi1(p)` under `x_i` and to `pi0(p)` under `!x_i`.
    /// The source is pin 0 of layer 0 and the sink is pin `sigma(0)` of the
    /// last layer, renumbered to be the final vertex.
    pub fn to_counting_bp(&self) -> Mod2Bp {
        let len = self.instructions.len();
        let size = 5 * (len + 1);
        let t_orig = 5 * len + self.sigma.apply(0) as usize;
        let last = size - 1;
        let renumber = |v: usize| {
            if v == t_orig {
                last
            } else if v == last {
                t_orig
            } else {
                v
            }
        };
        let mut edges = Vec::with_capacity(10 * len);
        for (k, ins) in self.instructions.iter().enumerate() {
            for p in 0..5u8 {
                let from = renumber(5 * k + p as usize);
                let to = |q: u8| renumber(5 * (k + 1) + q as usize);
                match ins.select {
                    Selector::Const(c) => {
                        let q = if c { ins.on_true } else { ins.on_false }.apply(p);
                        edges.push(Edge { from, to: to(q), label: Label::One });
                    }
                    Selector::Var(i) => {
                        let (q1, q0) = (ins.on_true.apply(p), ins.on_false.apply(p));
                        if q1 == q0 {
                            edges.push(Edge { from, to: to(q1), label: Label::One });
                        } else {
                            edges.push(Edge { from, to: to(q1), label: Label::Pos(i) });
                            edges.push(Edge { from, to: to(q0), label: Label::Neg(i) });
                        }
                    }
                }
            }
        }
        Mod2Bp::new(size, self.num_vars, edges).expect("layers are topologically ordered")
    }
}

/// Weighted depth of each gate: AND/OR add 1, XOR adds 2, NOT and constants add 0.
pub fn weighted_depths(c: &Circuit) -> Vec<usize> {
    let mut w: Vec<usize> = Vec::with_capacity(c.gates().len());
    for g in c.gates() {
        let below = g
            .inputs
            .iter()
            .map(|&wire| match wire {
                Wire::Input(_) => 0,
                Wire::Gate(j) => w[j],
            })
            .max()
            .unwrap_or(0);
        let cost = match g.kind {
            GateKind::And | GateKind::Or => 1,
            GateKind::Xor => 2,
            GateKind::Not | GateKind::Const0 | GateKind::Const1 => 0,
        };
        w.push(below + cost);
    }
    w
}

pub fn weighted_depth(c: &Circuit, out_bit: usize) -> usize {
    match c.outputs()[out_bit] {
        Wire::Input(_) => 0,
        Wire::Gate(j) => weighted_depths(c)[j],
    }
}

struct Compiler<'a> {
    circuit: &'a Circuit,
    commutators: HashMap<Perm5, (Perm5, Perm5)>,
}

impl<'a> Compiler<'a> {
    fn new(circuit: &'a Circuit) -> Self {
        let cycles: Vec<Perm5> = Perm5::all().into_iter().filter(|p| p.is_five_cycle()).collect();
        let mut commutators = HashMap::new();
        for &a in &cycles {
            for &b in &cycles {
                let c = a.then(b).then(a.inverse()).then(b.inverse());
                if c.is_five_cycle() {
                    commutators.entry(c).or_insert((a, b));
                }
            }
        }
        Compiler { circuit, commutators }
    }

    fn wire(&self, w: Wire, target: Perm5) -> Vec<Instruction> {
        match w {
            Wire::Input(i) => vec![Instruction {
                select: Selector::Var(i),
                on_true: target,
                on_false: Perm5::ID,
            }],
            Wire::Gate(j) => self.gate(j, target),
        }
    }

    fn not(&self, w: Wire, target: Perm5) -> Vec<Instruction> {
        let mut prog = self.wire(w, target.inverse());
        let last = prog.pop().expect("programs are nonempty");
        prog.push(last.then_const(target));
        prog
    }

    fn and(&self, a: Wire, b: Wire, target: Perm5) -> Vec<Instruction> {
        let (alpha, beta) = self.commutators[&target];
        let mut prog = self.wire(a, alpha);
        prog.extend(self.wire(b, beta));
        prog.extend(self.wire(a, alpha.inverse()));
        prog.extend(self.wire(b, beta.inverse()));
        prog
    }

    /// Program for `NOT (f(a) AND g(b))` where `f`, `g` are optional negations.
    fn nand_lits(&self, a: (Wire, bool), b: (Wire, bool), target: Perm5) -> Vec<Instruction> {
        let (alpha, beta) = self.commutators[&target.inverse()];
        let lit = |(w, neg): (Wire, bool), t: Perm5| {
            if neg {
                self.not(w, t)
            } else {
                self.wire(w, t)
            }
        };
        let mut prog = lit(a, alpha);
        prog.extend(lit(b, beta));
        prog.extend(lit(a, alpha.inverse()));
        prog.extend(lit(b, beta.inverse()));
        let last = prog.pop().expect("nonempty");
        prog.push(last.then_const(target));
        prog
    }

    fn gate(&self, j: usize, target: Perm5) -> Vec<Instruction> {
        let g = &self.circuit.gates()[j];
        match g.kind {
            GateKind::Const0 | GateKind::Const1 => vec![Instruction {
                select: Selector::Const(g.kind == GateKind::Const1),
                on_true: target,
                on_false: Perm5::ID,
            }],
            GateKind::Not => self.not(g.inputs[0], target),
            GateKind::And => self.and(g.inputs[0], g.inputs[1], target),
            GateKind::Or => self.nand_lits((g.inputs[0], true), (g.inputs[1], true), target),
            GateKind::Xor => {
                let (alpha, beta) = self.commutators[&target];
                let (a, b) = (g.inputs[0], g.inputs[1]);
                let nand = |t| self.nand_lits((a, false), (b, false), t);
                let or = |t| self.nand_lits((a, true), (b, true), t);
                let mut prog = nand(alpha);
                prog.extend(or(beta));
                prog.extend(nand(alpha.inverse()));
                prog.extend(or(beta.inverse()));
                prog
            }
        }
    }
}

/// Width-5 permutation program for output `out_bit`, or `None` when the
/// output is a constant gate.
pub fn permutation_program(
    c: &Circuit,
    out_bit: usize,
    max_depth: usize,
) -> Result<Option<PermutationProgram>> {
    if out_bit >= c.num_outputs() {
        return Err(Error::Bound {
            what: format!("output index {out_bit}"),
            bound: c.num_outputs(),
        });
    }
    let depth = c.analyze().depth;
    if depth > max_depth {
        return Err(Error::Bound {
            what: format!("circuit depth {depth}"),
            bound: max_depth,
        });
    }
    let out = c.outputs()[out_bit];
    if let Wire::Gate(j) = out {
        if matches!(c.gates()[j].kind, GateKind::Const0 | GateKind::Const1) {
            return Ok(None);
        }
    }
    let compiler = Compiler::new(c);
    Ok(Some(PermutationProgram {
        num_vars: c.num_inputs(),
        sigma: SIGMA,
        instructions: compiler.wire(out, SIGMA),
    }))
}

/// Compiles output `out_bit` of `c` into a mod-2 counting branching program.
pub fn barrington_compile(c: &Circuit, out_bit: usize, max_depth: usize) -> Result<Mod2Bp> {
    match permutation_program(c, out_bit, max_depth)? {
        Some(prog) => Ok(prog.to_counting_bp()),
        None => {
            let Wire::Gate(j) = c.outputs()[out_bit] else {
                unreachable!("constant outputs are gates")
            };
            Ok(Mod2Bp::constant(
                c.gates()[j].kind == GateKind::Const1,
                c.num_inputs(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(x: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| (x >> i) & 1 == 1).collect()
    }

    fn check_exhaustive(src: &str) {
        let c = Circuit::parse(src).unwrap();
        for out in 0..c.num_outputs() {
            let bp = barrington_compile(&c, out, DEFAULT_MAX_DEPTH).unwrap();
            for x in 0..1u64 << c.num_inputs() {
                let xb = bits(x, c.num_inputs());
                assert_eq!(
                    bp.eval_paths(&xb).unwrap(),
                    c.eval(&xb).unwrap()[out],
                    "x={x:b}\n{src}"
                );
            }
        }
    }

    #[test]
    fn s5_has_24_five_cycles() {
        let all = Perm5::all();
        assert_eq!(all.len(), 120);
        assert_eq!(all.iter().filter(|p| p.is_five_cycle()).count(), 24);
        assert!(SIGMA.is_five_cycle());
        assert_eq!(SIGMA.then(SIGMA.inverse()), Perm5::ID);
    }

    #[test]
    fn every_five_cycle_is_a_commutator_of_five_cycles() {
        let c = Circuit::new(0);
        let comp = Compiler::new(&c);
        assert_eq!(comp.commutators.len(), 24);
    }

    #[test]
    fn constant_outputs() {
        let c = Circuit::parse("g = CONST0\nOUTPUT g").unwrap();
        let bp = barrington_compile(&c, 0, 6).unwrap();
        assert_eq!(bp.size(), 2);
        assert!(!bp.eval_paths(&[]).unwrap());
        let c = Circuit::parse("g = CONST1\nOUTPUT g").unwrap();
        assert!(barrington_compile(&c, 0, 6).unwrap().eval_paths(&[]).unwrap());
    }

    #[test]
    fn single_gates() {
        check_exhaustive("INPUT a\nINPUT b\ng = AND a b\nOUTPUT g");
        check_exhaustive("INPUT a\nINPUT b\ng = OR a b\nOUTPUT g");
        check_exhaustive("INPUT a\nINPUT b\ng = XOR a b\nOUTPUT g");
        check_exhaustive("INPUT a\ng = NOT a\nOUTPUT g");
        check_exhaustive("INPUT a\nOUTPUT a");
        check_exhaustive("INPUT a\nk = CONST1\ng = AND a k\nh = XOR g k\nOUTPUT h");
    }

    #[test]
    fn length_within_weighted_bound() {
        let src = "INPUT a\nINPUT b\nINPUT c\nab = AND a b\nx = XOR ab c\nn = NOT x\nOUTPUT n";
        let c = Circuit::parse(src).unwrap();
        let prog = permutation_program(&c, 0, 6).unwrap().unwrap();
        let w = weighted_depth(&c, 0);
        assert_eq!(w, 3);
        assert!(prog.len() <= 4usize.pow(w as u32));
        let bp = prog.to_counting_bp();
        assert_eq!(bp.size(), 5 * (prog.len() + 1));
        check_exhaustive(src);
    }

    #[test]
    fn depth_bound_enforced() {
        let mut c = Circuit::new(2);
        let mut w = Wire::Input(0);
        for _ in 0..7 {
            w = c.add_gate(GateKind::And, &[w, Wire::Input(1)]);
        }
        c.add_output(w);
        assert!(matches!(
            barrington_compile(&c, 0, 6),
            Err(Error::Bound { bound: 6, .. })
        ));
        assert!(barrington_compile(&c, 0, 7).is_ok());
    }
}
