//! Mod-2 counting branching programs.
//!
//! Vertices are numbered `0..l` in topological order with the source `s = 0`
//! and the sink `t = l - 1`; every edge goes from a lower to a higher index.
//! The program outputs the number of `s -> t` paths in the subgraph selected
//! by the input, modulo 2.
//!
//! The text form numbers vertices from 1 (so `s = 1`, `t = l`):
//!
//! ```text
//! BP l=4 vars=3
//! EDGE 1 2 1
//! EDGE 1 3 x0
//! EDGE 2 3 x1
//! EDGE 2 4 !x1
//! EDGE 3 4 x2
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::anf::AnfPolynomial;
use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    One,
    Pos(usize),
    Neg(usize),
}

impl Label {
    #[inline]
    pub fn active(self, x: &[bool]) -> bool {
        match self {
            Label::One => true,
            Label::Pos(i) => x[i],
            Label::Neg(i) => !x[i],
        }
    }

    pub fn affine(self) -> AffineForm {
        match self {
            Label::One => AffineForm::constant(true),
            Label::Pos(i) => AffineForm::var(i),
            Label::Neg(i) => {
                let mut f = AffineForm::var(i);
                f.constant = true;
                f
            }
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::One => f.write_str("1"),
            Label::Pos(i) => write!(f, "x{i}"),
            Label::Neg(i) => write!(f, "!x{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Label,
}

/// A GF(2)-affine form `c + sum x_i` in the input variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AffineForm {
    pub constant: bool,
    pub vars: BTreeSet<usize>,
}

impl AffineForm {
    pub fn constant(c: bool) -> Self {
        AffineForm {
            constant: c,
            vars: BTreeSet::new(),
        }
    }

    pub fn var(i: usize) -> Self {
        AffineForm {
            constant: false,
            vars: BTreeSet::from([i]),
        }
    }

    pub fn add(&mut self, other: &AffineForm) {
        self.constant ^= other.constant;
        for &v in &other.vars {
            if !self.vars.remove(&v) {
                self.vars.insert(v);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        !self.constant && self.vars.is_empty()
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        self.vars.iter().fold(self.constant, |acc, &v| acc ^ x[v])
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        if self.constant {
            terms.push("1".into());
        }
        terms.extend(self.vars.iter().map(|v| format!("x{v}")));
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join("+"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mod2Bp {
    size: usize,
    num_vars: usize,
    edges: Vec<Edge>,
}

impl Mod2Bp {
    pub fn new(size: usize, num_vars: usize, edges: Vec<Edge>) -> Result<Self> {
        if size < 2 {
            return Err(Error::MalformedBp(format!(
                "needs at least 2 vertices, got {size}"
            )));
        }
        for e in &edges {
            if e.from >= e.to || e.to >= size {
                return Err(Error::MalformedBp(format!(
                    "edge {} -> {} violates the topological order on {size} vertices",
                    e.from, e.to
                )));
            }
            if let Label::Pos(i) | Label::Neg(i) = e.label {
                if i >= num_vars {
                    return Err(Error::MalformedBp(format!(
                        "edge label x{i} outside {num_vars} variables"
                    )));
                }
            }
        }
        Ok(Mod2Bp {
            size,
            num_vars,
            edges,
        })
    }

    /// Two-vertex program for a constant function.
    pub fn constant(value: bool, num_vars: usize) -> Self {
        let edges = if value {
            vec![Edge {
                from: 0,
                to: 1,
                label: Label::One,
            }]
        } else {
            Vec::new()
        };
        Mod2Bp {
            size: 2,
            num_vars,
            edges,
        }
    }

    /// The size-4 program over `(x0, x1, x2)` with edges
    /// `s->1:1, s->2:x0, 1->2:x1, 1->t:!x1, 2->t:x2`.
    pub fn four_vertex_example() -> Self {
        let e = |from, to, label| Edge { from, to, label };
        Mod2Bp::new(
            4,
            3,
            vec![
                e(0, 1, Label::One),
                e(0, 2, Label::Pos(0)),
                e(1, 2, Label::Pos(1)),
                e(1, 3, Label::Neg(1)),
                e(2, 3, Label::Pos(2)),
            ],
        )
        .expect("well-formed")
    }

    /// Size `l` is the vertex count.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Path count from `s` to `t` modulo 2, by dynamic programming in
    /// topological order.
    pub fn eval_paths(&self, x: &[bool]) -> Result<bool> {
        if x.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        let mut reach = vec![false; self.size];
        reach[0] = true;
        let mut order: Vec<&Edge> = self.edges.iter().collect();
        order.sort_by_key(|e| e.from);
        for e in order {
            if reach[e.from] && e.label.active(x) {
                reach[e.to] ^= true;
            }
        }
        Ok(reach[self.size - 1])
    }

    pub fn eval_u64(&self, x: u64) -> bool {
        let bits: Vec<bool> = (0..self.num_vars).map(|i| (x >> i) & 1 == 1).collect();
        self.eval_paths(&bits).expect("length matches")
    }

    /// Adjacency entries as affine forms; parallel edges add mod 2.
    pub fn symbolic_adjacency(&self) -> Vec<Vec<AffineForm>> {
        let mut a = vec![vec![AffineForm::default(); self.size]; self.size];
        for e in &self.edges {
            a[e.from][e.to].add(&e.label.affine());
        }
        a
    }

    /// `L(x)`: the `(l-1) x (l-1)` submatrix of `A(x) - I` without its first
    /// column and last row. Over GF(2) the `-1` entries on the subdiagonal
    /// become 1.
    pub fn l_matrix_symbolic(&self) -> Vec<Vec<AffineForm>> {
        let n = self.size - 1;
        let a = self.symbolic_adjacency();
        let mut l = vec![vec![AffineForm::default(); n]; n];
        for (i, row) in l.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][j + 1].clone();
                if i == j + 1 {
                    entry.constant ^= true;
                }
            }
        }
        l
    }

    pub fn l_matrix(&self, x: &[bool]) -> Result<Gf2Matrix> {
        if x.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        let n = self.size - 1;
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 1..n {
            m.set(i, i - 1, true);
        }
        for e in &self.edges {
            if e.label.active(x) && e.to >= 1 && e.from < n {
                let v = m.get(e.from, e.to - 1);
                m.set(e.from, e.to - 1, !v);
            }
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("BP l={} vars={}\n", self.size, self.num_vars);
        for e in &self.edges {
            s.push_str(&format!("EDGE {} {} {}\n", e.from + 1, e.to + 1, e.label));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Mod2Bp> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stmt = raw.split('#').next().unwrap_or("").trim();
            if stmt.is_empty() {
                continue;
            }
            let toks: Vec<&str> = stmt.split_whitespace().collect();
            let perr = |msg: &str| Error::Parse {
                line,
                msg: msg.to_string(),
            };
            match toks[0] {
                "BP" => {
                    if header.is_some() || toks.len() != 3 {
                        return Err(perr("expected a single `BP l=<n> vars=<m>` header"));
                    }
                    let field = |tok: &str, key: &str| {
                        tok.strip_prefix(key)
                            .and_then(|v| v.parse::<usize>().ok())
                            .ok_or_else(|| perr(&format!("bad header field `{tok}`")))
                    };
                    header = Some((field(toks[1], "l=")?, field(toks[2], "vars=")?));
                }
                "EDGE" => {
                    if header.is_none() {
                        return Err(perr("EDGE before header"));
                    }
                    if toks.len() != 4 {
                        return Err(perr("expected `EDGE <from> <to> <label>`"));
                    }
                    let vertex = |t: &str| {
                        t.parse::<usize>()
                            .ok()
                            .filter(|&v| v >= 1)
                            .map(|v| v - 1)
                            .ok_or_else(|| perr(&format!("bad vertex `{t}`")))
                    };
                    let label = match toks[3] {
                        "1" => Label::One,
                        t => {
                            let (neg, rest) = match t.strip_prefix('!') {
                                Some(r) => (true, r),
                                None => (false, t),
                            };
                            let i = rest
                                .strip_prefix('x')
                                .and_then(|v| v.parse::<usize>().ok())
                                .ok_or_else(|| perr(&format!("bad label `{t}`")))?;
                            if neg {
                                Label::Neg(i)
                            } else {
                                Label::Pos(i)
                            }
                        }
                    };
                    edges.push(Edge {
                        from: vertex(toks[1])?,
                        to: vertex(toks[2])?,
                        label,
                    });
                }
                other => return Err(perr(&format!("unknown statement `{other}`"))),
            }
        }
        let (l, vars) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing BP header".into(),
        })?;
        Mod2Bp::new(l, vars, edges)
    }
}

/// One `s -> t` path per monomial, each edge labeled by one of the
/// monomial's variables; the constant monomial becomes a single `1` edge.
pub fn anf_to_bp(p: &AnfPolynomial) -> Mod2Bp {
    let mut edges = Vec::new();
    let internal: usize = p
        .monomial_vars()
        .iter()
        .map(|m| m.len().saturating_sub(1))
        .sum();
    let t = internal + 1;
    let mut next = 1;
    for vars in p.monomial_vars() {
        if vars.is_empty() {
            edges.push(Edge {
                from: 0,
                to: t,
                label: Label::One,
            });
            continue;
        }
        let mut prev = 0;
        for (k, &v) in vars.iter().enumerate() {
            let to = if k + 1 == vars.len() {
                t
            } else {
                next += 1;
                next - 1
            };
            edges.push(Edge {
                from: prev,
                to,
                label: Label::Pos(v),
            });
            prev = to;
        }
    }
    Mod2Bp::new(t + 1, p.num_vars(), edges).expect("constructed in topological order")
}

/// Evaluates `x` given as packed bits of a [`BitVec`].
pub fn eval_bits(bp: &Mod2Bp, x: &BitVec) -> Result<bool> {
    bp.eval_paths(&x.to_bools())
}
