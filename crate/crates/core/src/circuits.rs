//! Boolean circuits over {AND, OR, XOR, NOT, CONST0, CONST1}.
//!
//! Text format, one statement per line:
//!
//! ```text
//! INPUT x0
//! INPUT x1
//! g1 = AND x0 x1      # comment
//! g2 = NOT g1
//! OUTPUT g2
//! ```
//!
//! Inputs are numbered in declaration order, which fixes the bit order of
//! evaluation vectors.

use std::collections::HashMap;
use std::fmt;

use crate::anf::AnfPolynomial;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wire {
    Input(usize),
    Gate(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Xor,
    Not,
    Const0,
    Const1,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::And | GateKind::Or | GateKind::Xor => 2,
            GateKind::Not => 1,
            GateKind::Const0 | GateKind::Const1 => 0,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::Not => "NOT",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    fn from_mnemonic(s: &str) -> Option<GateKind> {
        Some(match s {
            "AND" => GateKind::And,
            "OR" => GateKind::Or,
            "XOR" => GateKind::Xor,
            "NOT" => GateKind::Not,
            "CONST0" => GateKind::Const0,
            "CONST1" => GateKind::Const1,
            _ => return None,
        })
    }

    pub fn apply(self, ins: &[bool]) -> bool {
        match self {
            GateKind::And => ins[0] & ins[1],
            GateKind::Or => ins[0] | ins[1],
            GateKind::Xor => ins[0] ^ ins[1],
            GateKind::Not => !ins[0],
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<Wire>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    input_names: Vec<String>,
    gates: Vec<Gate>,
    outputs: Vec<Wire>,
}

/// Depth and per-wire fan-out of a circuit.
///
/// Wire indices run over inputs first, then gates. `references` counts
/// gate-input slots pointing at each wire; `fanout` is the same count floored
/// at 1 so that every wire has a well-defined replication factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub depth: usize,
    pub references: Vec<usize>,
    pub fanout: Vec<usize>,
}

impl Analysis {
    pub fn input_fanout(&self, num_inputs: usize) -> &[usize] {
        &self.fanout[..num_inputs]
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Circuit {
    /// Empty circuit with inputs named `x0..x{n-1}`.
    pub fn new(num_inputs: usize) -> Self {
        Circuit {
            input_names: (0..num_inputs).map(|i| format!("x{i}")).collect(),
            gates: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[Wire] {
        &self.outputs
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn wire_index(&self, w: Wire) -> usize {
        match w {
            Wire::Input(i) => i,
            Wire::Gate(g) => self.num_inputs() + g,
        }
    }

    fn check_wire(&self, w: Wire) {
        match w {
            Wire::Input(i) => assert!(i < self.num_inputs(), "input {i} out of range"),
            Wire::Gate(g) => assert!(g < self.gates.len(), "gate {g} not yet defined"),
        }
    }

    /// Appends a gate; panics on arity mismatch or forward references.
    pub fn add_gate(&mut self, kind: GateKind, inputs: &[Wire]) -> Wire {
        assert_eq!(inputs.len(), kind.arity(), "{} arity", kind.mnemonic());
        for &w in inputs {
            self.check_wire(w);
        }
        let id = self.gates.len();
        self.gates.push(Gate {
            name: format!("g{}", id + 1),
            kind,
            inputs: inputs.to_vec(),
        });
        Wire::Gate(id)
    }

    pub fn add_output(&mut self, w: Wire) {
        self.check_wire(w);
        self.outputs.push(w);
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        let mut c = Circuit {
            input_names: Vec::new(),
            gates: Vec::new(),
            outputs: Vec::new(),
        };
        let mut names: HashMap<String, Wire> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stmt = raw.split('#').next().unwrap_or("").trim();
            if stmt.is_empty() {
                continue;
            }
            let toks: Vec<&str> = stmt.split_whitespace().collect();
            let resolve = |name: &str, names: &HashMap<String, Wire>| {
                names.get(name).copied().ok_or_else(|| Error::UndefinedWire {
                    line,
                    name: name.to_string(),
                })
            };
            match toks[0] {
                "INPUT" => {
                    if toks.len() != 2 || !valid_name(toks[1]) {
                        return Err(Error::Parse {
                            line,
                            msg: "expected `INPUT <name>`".into(),
                        });
                    }
                    if names.contains_key(toks[1]) {
                        return Err(Error::Parse {
                            line,
                            msg: format!("duplicate wire name `{}`", toks[1]),
                        });
                    }
                    names.insert(toks[1].to_string(), Wire::Input(c.input_names.len()));
                    c.input_names.push(toks[1].to_string());
                }
                "OUTPUT" => {
                    if toks.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            msg: "expected `OUTPUT <wire>`".into(),
                        });
                    }
                    let w = resolve(toks[1], &names)?;
                    c.outputs.push(w);
                }
                name => {
                    if toks.len() < 3 || toks[1] != "=" || !valid_name(name) {
                        return Err(Error::Parse {
                            line,
                            msg: "expected `<name> = <GATE> <inputs...>`".into(),
                        });
                    }
                    let kind = GateKind::from_mnemonic(toks[2]).ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("unknown gate `{}`", toks[2]),
                    })?;
                    let args = &toks[3..];
                    if args.len() != kind.arity() {
                        return Err(Error::Arity {
                            line,
                            gate: kind.mnemonic().to_string(),
                            expected: kind.arity(),
                            got: args.len(),
                        });
                    }
                    if names.contains_key(name) {
                        return Err(Error::Parse {
                            line,
                            msg: format!("duplicate wire name `{name}`"),
                        });
                    }
                    let inputs = args
                        .iter()
                        .map(|a| resolve(a, &names))
                        .collect::<Result<Vec<_>>>()?;
                    names.insert(name.to_string(), Wire::Gate(c.gates.len()));
                    c.gates.push(Gate {
                        name: name.to_string(),
                        kind,
                        inputs,
                    });
                }
            }
        }
        Ok(c)
    }

    fn wire_name(&self, w: Wire) -> &str {
        match w {
            Wire::Input(i) => &self.input_names[i],
            Wire::Gate(g) => &self.gates[g].name,
        }
    }

    /// Values of every gate under `x`, in gate order.
    pub fn eval_gates(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.num_inputs() {
            return Err(Error::LengthMismatch {
                expected: self.num_inputs(),
                got: x.len(),
            });
        }
        let mut vals = Vec::with_capacity(self.gates.len());
        let mut ins = [false; 2];
        for g in &self.gates {
            for (slot, &w) in ins.iter_mut().zip(&g.inputs) {
                *slot = match w {
                    Wire::Input(i) => x[i],
                    Wire::Gate(j) => vals[j],
                };
            }
            vals.push(g.kind.apply(&ins[..g.inputs.len()]));
        }
        Ok(vals)
    }

    pub fn eval(&self, x: &[bool]) -> Result<Vec<bool>> {
        let vals = self.eval_gates(x)?;
        Ok(self
            .outputs
            .iter()
            .map(|&w| match w {
                Wire::Input(i) => x[i],
                Wire::Gate(g) => vals[g],
            })
            .collect())
    }

    /// Evaluates on the low `num_inputs` bits of `x` and packs the outputs.
    pub fn eval_u64(&self, x: u64) -> u64 {
        let bits: Vec<bool> = (0..self.num_inputs()).map(|i| (x >> i) & 1 == 1).collect();
        self.eval(&bits)
            .expect("length matches by construction")
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    /// Gate levels: inputs sit at level 0, a gate one above its deepest input.
    pub fn gate_levels(&self) -> Vec<usize> {
        let mut level = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let below = g
                .inputs
                .iter()
                .map(|&w| match w {
                    Wire::Input(_) => 0,
                    Wire::Gate(j) => level[j],
                })
                .max()
                .unwrap_or(0);
            level.push(below + 1);
        }
        level
    }

    pub fn analyze(&self) -> Analysis {
        let depth = self.gate_levels().into_iter().max().unwrap_or(0);
        let mut references = vec![0; self.num_inputs() + self.gates.len()];
        for g in &self.gates {
            for &w in &g.inputs {
                references[self.wire_index(w)] += 1;
            }
        }
        let fanout = references.iter().map(|&r| r.max(1)).collect();
        Analysis {
            depth,
            references,
            fanout,
        }
    }

    /// Algebraic normal form of output `out_bit` by exhaustive evaluation.
    pub fn anf(&self, out_bit: usize) -> Result<AnfPolynomial> {
        if out_bit >= self.num_outputs() {
            return Err(Error::Bound {
                what: format!("output index {out_bit}"),
                bound: self.num_outputs(),
            });
        }
        crate::anf::truth_table_anf(self.num_inputs(), out_bit, |x| self.eval_u64(x))
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in &self.input_names {
            writeln!(f, "INPUT {name}")?;
        }
        for g in &self.gates {
            write!(f, "{} = {}", g.name, g.kind.mnemonic())?;
            for &w in &g.inputs {
                write!(f, " {}", self.wire_name(w))?;
            }
            writeln!(f)?;
        }
        for &w in &self.outputs {
            writeln!(f, "OUTPUT {}", self.wire_name(w))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAJ3: &str = "\
# majority of three
INPUT a
INPUT b
INPUT c
ab = AND a b
aorb = OR a b
cab = AND c aorb
m = OR ab cab
OUTPUT m
";

    #[test]
    fn minimal_program_parses() {
        let c = Circuit::parse("INPUT x0\nINPUT x1\ng1 = AND x0 x1\nOUTPUT g1").unwrap();
        assert_eq!(c.num_inputs(), 2);
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.eval(&[true, true]).unwrap(), vec![true]);
        assert_eq!(c.eval(&[true, false]).unwrap(), vec![false]);
    }

    #[test]
    fn arity_error_reported() {
        let err = Circuit::parse("g1 = AND x0").unwrap_err();
        assert!(matches!(err, Error::Arity { line: 1, expected: 2, got: 1, .. }), "{err}");
    }

    #[test]
    fn undefined_wire_and_syntax_errors_carry_line_numbers() {
        let err = Circuit::parse("INPUT a\n\ng = AND a b\n").unwrap_err();
        assert_eq!(
            err,
            Error::UndefinedWire {
                line: 3,
                name: "b".into()
            }
        );
        assert!(matches!(
            Circuit::parse("INPUT a\nOUTPUT\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Circuit::parse("INPUT 9a"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Circuit::parse("INPUT a\ng = NAND a a"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn majority_matches_truth_table() {
        let c = Circuit::parse(MAJ3).unwrap();
        for x in 0..8u64 {
            let bits: Vec<bool> = (0..3).map(|i| (x >> i) & 1 == 1).collect();
            let expect = bits.iter().filter(|&&b| b).count() >= 2;
            assert_eq!(c.eval(&bits).unwrap(), vec![expect], "x={x:03b}");
        }
        assert_eq!(c.eval(&[true, false, true]).unwrap(), vec![true]);
    }

    #[test]
    fn eval_length_mismatch() {
        let c = Circuit::parse(MAJ3).unwrap();
        assert_eq!(
            c.eval(&[true]),
            Err(Error::LengthMismatch {
                expected: 3,
                got: 1
            })
        );
    }

    #[test]
    fn analysis_depth_and_fanout() {
        let c = Circuit::parse("INPUT x0\nINPUT x1\ng = AND x0 x1\nOUTPUT g").unwrap();
        let a = c.analyze();
        assert_eq!(a.depth, 1);
        assert_eq!(a.fanout[0], 1);

        let c = Circuit::parse("INPUT x0\ng = XOR x0 x0\nOUTPUT g").unwrap();
        assert_eq!(c.analyze().fanout[0], 2);

        let mut c = Circuit::new(3);
        let g = c.add_gate(GateKind::And, &[Wire::Input(0), Wire::Input(1)]);
        let h = c.add_gate(GateKind::And, &[g, Wire::Input(2)]);
        c.add_output(h);
        assert_eq!(c.analyze().depth, 2);
    }

    #[test]
    fn unused_wire_gets_unit_fanout() {
        let c = Circuit::parse("INPUT a\nINPUT b\nn = NOT a\nOUTPUT n").unwrap();
        let a = c.analyze();
        assert_eq!(a.references, vec![1, 0, 0]);
        assert_eq!(a.fanout, vec![1, 1, 1]);
    }

    #[test]
    fn serializer_roundtrip() {
        let c = Circuit::parse(MAJ3).unwrap();
        let again = Circuit::parse(&c.to_string()).unwrap();
        assert_eq!(c, again);
    }
}
