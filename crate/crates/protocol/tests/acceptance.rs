//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are fixed constants below.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dpoq_core::barrington::{barrington_compile, permutation_program, weighted_depth, DEFAULT_MAX_DEPTH};
use dpoq_core::bp::{anf_to_bp, Edge, Label, Mod2Bp};
use dpoq_core::circuits::Circuit;
use dpoq_core::gf2::Gf2Matrix;
use dpoq_core::randenc::{EncodedFunction, ReInstance, Randomness};
use dpoq_core::tcf::{Family, TcfKey};
use dpoq_core::BitVec;
use dpoq_protocol::invert::{bell_gamma, encoded_invert, likely_bit};
use dpoq_protocol::session::ProverKind;
use dpoq_protocol::{run_local, Phi, Protocol, Report, SessionConfig};
use dpoq_qsim::bench::sparse_throughput;
use dpoq_qsim::ghz::prepare_ghz;
use dpoq_qsim::{DepthMeter, Engine, ProverCircuit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORRECTNESS_SAMPLES: usize = 1000;
const CORRECTNESS_MAX_VARS: usize = 10;
const CORRECTNESS_SECS: f64 = 60.0;
const PRIVACY_SAMPLES: usize = 100_000;
const PRIVACY_TVD: f64 = 0.02;
const PRIVACY_SECS: f64 = 60.0;
const RECONSTRUCT_CASES: usize = 1000;
const RECONSTRUCT_SIZES: [usize; 4] = [3, 4, 5, 8];
const RECONSTRUCT_SECS: f64 = 30.0;
const COMMITS_PER_FAMILY: usize = 100;
const CORPUS_MAX_DEPTH: usize = 4;
/// Barrington length bound `c * 4^d` in terms of the weighted depth.
const BARRINGTON_C: usize = 1;
const DET_PAIRS: usize = 1000;
const BCMVV_ROUNDS: usize = 200;
const BCMVV_SECS: f64 = 120.0;
const BELL_MIN_TRIALS: u64 = 3000;
const KMCVY_ROUNDS: usize = 6400;
const BELL_RATE: f64 = 0.8536;
const BELL_RATE_TOL: f64 = 0.03;
const KMCVY_GAP: f64 = 2.41;
const KMCVY_GAP_TOL: f64 = 0.15;
const KMCVY_SECS: f64 = 300.0;
const CLASSICAL_BCMVV_ROUNDS: usize = 1000;
const CLASSICAL_GAP_BOUND: f64 = 0.1;
const CLASSICAL_BELL_MAX: f64 = 0.78;
const BCMVV_METER: (usize, usize) = (14, 3);
const KMCVY_METER: (usize, usize) = (18, 4);
const GHZ_METER: (usize, usize) = (5, 1);
const SHORTCUT_SAMPLES: usize = 10_000;
const SHORTCUT_TVD: f64 = 0.05;
const ROUND_MS: f64 = 100.0;
const ROUND_MIN_QUBITS: usize = 500;
const TIMED_ROUNDS: usize = 50;
const BENCH_QUBITS: usize = 500;
const BENCH_MIN_RATE: f64 = 1e5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parity of the number of source-to-sink paths, by dynamic programming over
/// the topological vertex order.
fn path_parity(bp: &Mod2Bp, x: &[bool]) -> bool {
    let mut count = vec![false; bp.size()];
    count[0] = true;
    let mut edges: Vec<&Edge> = bp.edges().iter().collect();
    edges.sort_by_key(|e| e.from);
    for e in edges {
        if e.label.active(x) {
            count[e.to] ^= count[e.from];
        }
    }
    count[bp.size() - 1]
}

fn bits_of(x: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (x >> i) & 1 == 1).collect()
}

fn random_bp<R: Rng>(size: usize, vars: usize, g: &mut R) -> Mod2Bp {
    let mut edges = Vec::new();
    for from in 0..size {
        for to in from + 1..size {
            if g.gen() {
                let v = g.gen_range(0..vars);
                let label = match g.gen_range(0..3) {
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

fn corpus() -> Vec<(String, Circuit)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus");
    let mut out: Vec<(String, Circuit)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "circ"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, Circuit::parse(&std::fs::read_to_string(&p).unwrap()).unwrap())
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn tvd<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut s = 0.0;
    for (k, a) in p {
        s += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            s += b;
        }
    }
    s / 2.0
}

fn normalize<K: Ord>(counts: BTreeMap<K, usize>) -> BTreeMap<K, f64> {
    let n: usize = counts.values().sum();
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

fn matrix_key(m: &Gf2Matrix) -> Vec<bool> {
    (0..m.rows()).flat_map(|i| (0..m.cols()).map(move |j| m.get(i, j))).collect()
}

fn session(protocol: Protocol, family: Family, rounds: usize, prover: ProverKind, seed: u64) -> Result<Report, String> {
    let cfg = SessionConfig {
        protocol,
        family,
        size: 3,
        rounds,
        seed,
        prover,
        timeout: Duration::from_secs(120),
        ..SessionConfig::default()
    };
    run_local(&cfg).result.map_err(|e| e.to_string())
}

// 1
fn correctness() -> Outcome {
    let start = Instant::now();
    let mut bps: Vec<(String, Mod2Bp)> = Vec::new();
    for (name, c) in corpus() {
        for o in 0..c.num_outputs() {
            bps.push((format!("{name}[{o}]/anf"), anf_to_bp(&c.anf(o).unwrap())));
            if c.analyze().depth <= 1 {
                bps.push((format!("{name}[{o}]/barrington"), barrington_compile(&c, o, DEFAULT_MAX_DEPTH).unwrap()));
            }
        }
    }
    for (family, size) in [(Family::Rabin, 3), (Family::Toy, 4)] {
        let (key, _) = TcfKey::gen(family, size, &mut rng(1)).unwrap();
        for (b, p) in key.function_anf().unwrap().iter().enumerate() {
            bps.push((format!("{family:?}[{b}]"), anf_to_bp(p)));
        }
    }
    bps.push(("four-vertex".into(), Mod2Bp::four_vertex_example()));
    let mut g = rng(2);
    for (size, vars) in [(3, 2), (4, 4), (5, 6), (6, 8), (8, 10)] {
        bps.push((format!("random l={size}"), random_bp(size, vars, &mut g)));
    }

    let (mut cases, mut failures, mut max_vars) = (0u64, 0u64, 0);
    for (name, bp) in &bps {
        assert!(bp.num_vars() <= CORRECTNESS_MAX_VARS, "{name}");
        max_vars = max_vars.max(bp.num_vars());
        let inst = ReInstance::build(bp).unwrap();
        for x in 0..1u64 << bp.num_vars() {
            let xb = bits_of(x, bp.num_vars());
            let want = path_parity(bp, &xb);
            let xv = BitVec::from_bools(&xb);
            for _ in 0..CORRECTNESS_SAMPLES {
                let rand = Randomness::random(inst.layout(), &mut g);
                cases += 1;
                if inst.decode(&inst.encode(&xv, &rand).unwrap()).unwrap() != want {
                    failures += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < CORRECTNESS_SECS,
        format!("{} programs (up to {max_vars} vars), {cases} cases, {failures} failures, {secs:.1}s", bps.len()),
    )
}

// 2
fn privacy() -> Outcome {
    let start = Instant::now();
    let bp = Mod2Bp::four_vertex_example();
    let inst = ReInstance::build(&bp).unwrap();
    let (n1, n2) = (inst.layout().n_r1, inst.layout().n_r2);
    let enumerate = |m: &dyn Fn(&BitVec, &BitVec) -> Gf2Matrix| {
        let mut h = BTreeMap::new();
        for r in 0..1u64 << (n1 + n2) {
            *h.entry(matrix_key(&m(&BitVec::from_u64(r, n1), &BitVec::from_u64(r >> n1, n2)))).or_default() += 1;
        }
        normalize(h)
    };
    let garble = |l: &Gf2Matrix, r1: &BitVec, r2: &BitVec| {
        inst.r1_matrix(r1).mul(l).unwrap().mul(&inst.r2_matrix(r2)).unwrap()
    };
    let exact: Vec<_> = (0..8u64)
        .map(|x| {
            let l = bp.l_matrix(&bits_of(x, 3)).unwrap();
            enumerate(&|r1, r2| garble(&l, r1, r2))
        })
        .collect();
    let sim: Vec<_> = [false, true].iter().map(|&y| enumerate(&|r1, r2| garble(&inst.lambda(y), r1, r2))).collect();
    let value: Vec<bool> = (0..8).map(|x| path_parity(&bp, &bits_of(x, 3))).collect();

    let mut tilde_max: f64 = 0.0;
    for a in 0..8 {
        tilde_max = tilde_max.max(tvd(&exact[a], &sim[value[a] as usize]));
        for b in 0..8 {
            if value[a] == value[b] {
                tilde_max = tilde_max.max(tvd(&exact[a], &exact[b]));
            }
        }
    }

    // f̂ level: project each sample onto (folded matrix, first bit of block b)
    // and compare with the simulator's exact law for that projection, under
    // which the first bit of every nonempty block is an independent fair coin.
    let blocks: Vec<usize> = inst.layout().entries.iter().map(|e| 2 * e.k).collect();
    let mut hat_max: f64 = 0.0;
    let mut g = rng(3);
    for x in 0..8u64 {
        let xv = BitVec::from_u64(x, 3);
        let y = value[x as usize];
        let mut counts: Vec<BTreeMap<(Vec<bool>, bool), usize>> = vec![BTreeMap::new(); blocks.len()];
        for _ in 0..PRIVACY_SAMPLES {
            let out = inst.encode(&xv, &Randomness::random(inst.layout(), &mut g)).unwrap();
            let m = matrix_key(&inst.fold_matrix(&out).unwrap());
            for (b, blk) in out.blocks.iter().enumerate() {
                if !blk.is_empty() {
                    *counts[b].entry((m.clone(), blk.get(0))).or_default() += 1;
                }
            }
        }
        for (b, c) in counts.into_iter().enumerate() {
            if blocks[b] == 0 {
                continue;
            }
            let law: BTreeMap<(Vec<bool>, bool), f64> = sim[y as usize]
                .iter()
                .flat_map(|(m, p)| [((m.clone(), false), p / 2.0), ((m.clone(), true), p / 2.0)])
                .collect();
            hat_max = hat_max.max(tvd(&normalize(c), &law));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        tilde_max == 0.0 && hat_max <= PRIVACY_TVD && secs < PRIVACY_SECS,
        format!(
            "f~ exact TVD {tilde_max} over {} garblings; f^ sampled TVD max {hat_max:.4} ({PRIVACY_SAMPLES} samples/input); {secs:.1}s",
            1u64 << (n1 + n2)
        ),
    )
}

// 3
fn reconstruction() -> Outcome {
    let start = Instant::now();
    let mut g = rng(4);
    let mut failures = 0;
    for case in 0..RECONSTRUCT_CASES {
        let size = RECONSTRUCT_SIZES[case % RECONSTRUCT_SIZES.len()];
        let vars = g.gen_range(1..=6);
        let inst = ReInstance::build(&random_bp(size, vars, &mut g)).unwrap();
        let x = BitVec::random(vars, &mut g);
        let rand = Randomness::random(inst.layout(), &mut g);
        let y = inst.encode(&x, &rand).unwrap();
        if inst.reconstruct(&x, &y).ok().as_ref() != Some(&rand) {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < RECONSTRUCT_SECS,
        format!("{RECONSTRUCT_CASES} cases, l in {RECONSTRUCT_SIZES:?}, {failures} failures, {secs:.2}s"),
    )
}

// 4
fn collision_preservation() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (family, size) in [(Family::Rabin, 3), (Family::Toy, 4)] {
        let mut g = rng(5);
        let (key, td) = TcfKey::gen(family, size, &mut g).unwrap();
        let circuit = ProverCircuit::new(&key).unwrap();
        let f = circuit.function();
        let (mut ok, mut degenerate, mut failures) = (0, 0, 0);
        while ok + failures < COMMITS_PER_FAMILY {
            let c = circuit.commit(Engine::Shortcut, false, &mut g).unwrap();
            if c.post.is_none() {
                degenerate += 1;
                continue;
            }
            let good = match encoded_invert(&td, &key, f, &c.y_hat) {
                Ok(Some((a, b))) => {
                    f.input_of(&a) != f.input_of(&b)
                        && f.apply_hat(&a).unwrap() == c.y_hat
                        && f.apply_hat(&b).unwrap() == c.y_hat
                }
                _ => false,
            };
            if good {
                ok += 1;
            } else {
                failures += 1;
            }
        }
        pass &= failures == 0;
        details.push(format!("{family:?}: {ok} ok, {failures} failures, {degenerate} degenerate skipped"));
    }
    outcome(pass, details.join("; "))
}

// 5
fn barrington() -> Outcome {
    let (mut circuits, mut rows, mut mismatches, mut over_bound) = (0, 0u64, 0u64, 0);
    let mut longest = (String::new(), 0, 0);
    for (name, c) in corpus() {
        if c.analyze().depth > CORPUS_MAX_DEPTH {
            continue;
        }
        circuits += 1;
        for o in 0..c.num_outputs() {
            let bp = barrington_compile(&c, o, DEFAULT_MAX_DEPTH).unwrap();
            for x in 0..1u64 << c.num_inputs() {
                rows += 1;
                if bp.eval_u64(x) != ((c.eval_u64(x) >> o) & 1 == 1) {
                    mismatches += 1;
                }
            }
            if let Some(p) = permutation_program(&c, o, DEFAULT_MAX_DEPTH).unwrap() {
                let bound = BARRINGTON_C * 4usize.pow(weighted_depth(&c, o) as u32);
                if p.len() > bound {
                    over_bound += 1;
                }
                if p.len() > longest.1 {
                    longest = (name.clone(), p.len(), bound);
                }
            }
        }
    }
    let mut g = rng(6);
    let mut det_bad = 0;
    for _ in 0..DET_PAIRS {
        let size = g.gen_range(2..10);
        let vars = g.gen_range(1..6);
        let bp = random_bp(size, vars, &mut g);
        let x: Vec<bool> = (0..vars).map(|_| g.gen()).collect();
        if bp.l_matrix(&x).unwrap().det().unwrap() != path_parity(&bp, &x) {
            det_bad += 1;
        }
    }
    outcome(
        circuits > 0 && mismatches == 0 && over_bound == 0 && det_bad == 0,
        format!(
            "{circuits} circuits, {rows} truth-table rows, {mismatches} mismatches; length <= {BARRINGTON_C}*4^d violated {over_bound}x (longest {} = {} <= {}); det vs paths {det_bad}/{DET_PAIRS} disagree",
            longest.0, longest.1, longest.2
        ),
    )
}

fn meter_of(r: &Report) -> (usize, usize) {
    (r.depth, r.interleavings)
}

// 6
fn bcmvv_honest() -> (Outcome, Option<(usize, usize)>) {
    let start = Instant::now();
    match session(Protocol::Bcmvv, Family::Rabin, BCMVV_ROUNDS, ProverKind::Honest, 6) {
        Ok(r) => {
            let secs = start.elapsed().as_secs_f64();
            (
                outcome(
                    r.p_pre == 1.0 && r.p_eq_or_bell == 1.0 && r.gap == 1.0 && secs < BCMVV_SECS,
                    format!(
                        "{} rounds, p_pre {:.3}, p_eq {:.3}, gap {:.3}, ci_low {:.3}, verdict {:?}, {secs:.2}s",
                        r.rounds, r.p_pre, r.p_eq_or_bell, r.gap, r.ci_low, r.verdict
                    ),
                ),
                Some(meter_of(&r)),
            )
        }
        Err(e) => (outcome(false, e), None),
    }
}

// 7
fn kmcvy_honest() -> (Outcome, Option<(usize, usize)>) {
    let start = Instant::now();
    match session(Protocol::Kmcvy, Family::Rabin, KMCVY_ROUNDS, ProverKind::Honest, 7) {
        Ok(r) => {
            let secs = start.elapsed().as_secs_f64();
            let rate = r.n_s as f64 / r.n_t as f64;
            (
                outcome(
                    r.n_t >= BELL_MIN_TRIALS
                        && (rate - BELL_RATE).abs() <= BELL_RATE_TOL
                        && (r.gap - KMCVY_GAP).abs() <= KMCVY_GAP_TOL
                        && secs < KMCVY_SECS,
                    format!(
                        "{} Bell rounds, N_s/N_t {rate:.4} (target {BELL_RATE} +- {BELL_RATE_TOL}), p_pre {:.3}, gap {:.3} (target {KMCVY_GAP} +- {KMCVY_GAP_TOL}), verdict {:?}, {secs:.1}s",
                        r.n_t, r.p_pre, r.gap, r.verdict
                    ),
                ),
                Some(meter_of(&r)),
            )
        }
        Err(e) => (outcome(false, e), None),
    }
}

// 8
fn classical() -> Outcome {
    let b = session(Protocol::Bcmvv, Family::Rabin, CLASSICAL_BCMVV_ROUNDS, ProverKind::Classical, 8);
    let k = session(Protocol::Kmcvy, Family::Rabin, KMCVY_ROUNDS, ProverKind::Classical, 9);
    match (b, k) {
        (Ok(b), Ok(k)) => {
            let rate = k.n_s as f64 / k.n_t as f64;
            outcome(
                b.gap.abs() <= CLASSICAL_GAP_BOUND && k.n_t >= BELL_MIN_TRIALS && rate <= CLASSICAL_BELL_MAX,
                format!(
                    "BCMVV gap {:.3} over {} rounds (verdict {:?}); KMCVY N_s/N_t {rate:.4} over {} Bell rounds (verdict {:?})",
                    b.gap, b.rounds, b.verdict, k.n_t, k.verdict
                ),
            )
        }
        (b, k) => outcome(false, format!("{:?} / {:?}", b.err(), k.err())),
    }
}

// 9
fn depth_accounting(bcmvv: Option<(usize, usize)>, kmcvy: Option<(usize, usize)>) -> Outcome {
    let (_, _, meter): (_, _, DepthMeter) = prepare_ghz(8, &mut rng(10)).unwrap();
    let ghz = meter.totals();
    outcome(
        bcmvv == Some(BCMVV_METER) && kmcvy == Some(KMCVY_METER) && ghz == GHZ_METER,
        format!("BCMVV {bcmvv:?} (want {BCMVV_METER:?}), KMCVY {kmcvy:?} (want {KMCVY_METER:?}), GHZ {ghz:?} (want {GHZ_METER:?})"),
    )
}

// 10
fn shortcut_fidelity() -> Outcome {
    let (key, td) = TcfKey::toy_from_parts(2, vec![0, 1, 2, 3], 1).unwrap();
    let circuit = ProverCircuit::new(&key).unwrap();
    let f = circuit.function();
    let superposed = f.preimage_len();
    // Returns the raw joint law and, for the Bell branch, its projection onto
    // the verifier's view: (y_hat, c, preimage | Bell test passed).
    let joint = |engine: Engine, bell: bool, seed: u64| {
        let mut g = rng(seed);
        let mut raw: BTreeMap<String, usize> = BTreeMap::new();
        let mut view: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..SHORTCUT_SAMPLES {
            let c = circuit.commit(engine, bell, &mut g).unwrap();
            let post = c.post.unwrap();
            let mut m = c.meter;
            let challenge: u8 = g.gen_range(0..2);
            let (response, verdict) = match (challenge, bell) {
                (0, _) => {
                    let x = post.preimage_test(&mut g, &mut m).unwrap().to_string();
                    (x.clone(), x)
                }
                (_, false) => {
                    let d = post.equation_test(&mut g, &mut m).unwrap().to_string();
                    (d.clone(), d)
                }
                (_, true) => {
                    let v = BitVec::random(superposed, &mut g);
                    let phi = if g.gen() { Phi::Plus } else { Phi::Minus };
                    let (d, pending) = post.bell_measure(&v, &mut g, &mut m).unwrap();
                    let bit = pending.finish(phi.radians(), &mut g, &mut m) as u8;
                    let (x0, x1) = encoded_invert(&td, &key, f, &c.y_hat).unwrap().unwrap();
                    let ok = bit == likely_bit(bell_gamma(&x0, &x1, &v, &d), phi);
                    (format!("{v}/{phi:?}/{d}/{bit}"), format!("bell {ok}"))
                }
            };
            *raw.entry(format!("{}|{challenge}|{response}", c.y_hat)).or_default() += 1;
            *view.entry(format!("{}|{challenge}|{verdict}", c.y_hat)).or_default() += 1;
        }
        (normalize(raw), normalize(view))
    };
    let (full, _) = joint(Engine::Full, false, 11);
    let (short, _) = joint(Engine::Shortcut, false, 12);
    let eq_tvd = tvd(&full, &short);
    let eq_cells = full.len().max(short.len());
    let (full_raw, full_view) = joint(Engine::Full, true, 13);
    let (short_raw, short_view) = joint(Engine::Shortcut, true, 14);
    let bell_tvd = tvd(&full_view, &short_view);
    let raw_cells = full_raw.len().max(short_raw.len());
    let floor = |k: usize| 0.4 * (2.0 * k as f64 / SHORTCUT_SAMPLES as f64).sqrt();
    outcome(
        eq_tvd <= SHORTCUT_TVD && bell_tvd <= SHORTCUT_TVD && superposed <= 12,
        format!(
            "toy m=2, {superposed} superposed bits, {SHORTCUT_SAMPLES} samples per engine; \
             (y_hat, c, response) TVD {eq_tvd:.4} over {eq_cells} cells; \
             Bell branch verifier view TVD {bell_tvd:.4} over {} cells; \
             info: raw Bell joint TVD {:.4} over {raw_cells} cells (sampling floor ~{:.3})",
            full_view.len().max(short_view.len()),
            tvd(&full_raw, &short_raw),
            floor(raw_cells)
        ),
    )
}

// 11
fn performance() -> Outcome {
    let (key, _) = TcfKey::rabin_from_primes(3, 7).unwrap();
    let circuit = ProverCircuit::new(&key).unwrap();
    let width = circuit.replicated_width();
    let mut g = rng(15);
    let mut lines = Vec::new();
    let mut pass = width >= ROUND_MIN_QUBITS;
    for (label, bell, max_support) in [("bcmvv", false, 2), ("kmcvy", true, 4)] {
        let (mut rounds, mut worst, mut total, mut support) = (0, 0.0f64, 0.0, 0);
        while rounds < TIMED_ROUNDS {
            let t = Instant::now();
            let c = circuit.commit(Engine::Shortcut, bell, &mut g).unwrap();
            let Some(post) = c.post else { continue };
            support = support.max(post.state.support());
            let mut m = c.meter;
            match (g.gen::<bool>(), bell) {
                (false, _) => drop(post.preimage_test(&mut g, &mut m).unwrap()),
                (true, false) => drop(post.equation_test(&mut g, &mut m).unwrap()),
                (true, true) => {
                    let v = BitVec::random(circuit.function().preimage_len(), &mut g);
                    let (_, pending) = post.bell_measure(&v, &mut g, &mut m).unwrap();
                    pending.finish(std::f64::consts::FRAC_PI_4, &mut g, &mut m);
                }
            }
            let ms = t.elapsed().as_secs_f64() * 1e3;
            worst = worst.max(ms);
            total += ms;
            rounds += 1;
        }
        pass &= support <= max_support && worst < ROUND_MS;
        lines.push(format!(
            "{label} support {support} (register x GHZ ancilla <= {max_support}), round mean {:.2} ms max {worst:.2} ms",
            total / rounds as f64
        ));
    }
    let bench = sparse_throughput(BENCH_QUBITS, Duration::from_millis(500), &mut rng(16)).unwrap();
    pass &= bench.gates_per_second >= BENCH_MIN_RATE;
    outcome(
        pass,
        format!(
            "register {width} qubits; {}; bench {:.3e} gates/s on {} qubits",
            lines.join("; "),
            bench.gates_per_second,
            bench.qubits
        ),
    )
}

// 12
fn width_report() -> Outcome {
    let (key, _) = TcfKey::rabin_from_primes(3, 7).unwrap();
    let bps: Vec<_> = key.function_anf().unwrap().iter().map(anf_to_bp).collect();
    let w = EncodedFunction::new(&bps).unwrap().estimate_width();
    outcome(
        w.asymptotic == "O(λ·l⁴)" && w.full_scale_note.contains("lambda^33") && w.full_scale_note.contains("not computed"),
        format!("{} total qubits for N=21, asymptotic {}, note: {}", w.total_qubits, w.asymptotic, w.full_scale_note),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u8, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: u8, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        results.push((id, name, o, t.elapsed().as_secs_f64()));
    };
    let mut meters: HashMap<&str, Option<(usize, usize)>> = HashMap::new();
    timed(1, "perfect correctness", &mut correctness);
    timed(2, "perfect privacy", &mut privacy);
    timed(3, "randomness reconstruction", &mut reconstruction);
    timed(4, "collision preservation", &mut collision_preservation);
    timed(5, "barrington compiler", &mut barrington);
    timed(6, "bcmvv honest run", &mut || {
        let (o, m) = bcmvv_honest();
        meters.insert("bcmvv", m);
        o
    });
    timed(7, "kmcvy honest bell rate", &mut || {
        let (o, m) = kmcvy_honest();
        meters.insert("kmcvy", m);
        o
    });
    timed(8, "classical baseline", &mut classical);
    let (b, k) = (meters["bcmvv"], meters["kmcvy"]);
    timed(9, "depth accounting", &mut || depth_accounting(b, k));
    timed(10, "simulation shortcut fidelity", &mut shortcut_fidelity);
    timed(11, "performance", &mut performance);
    timed(12, "width report", &mut width_report);

    let mut failed = 0;
    for (id, name, o, secs) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!("criterion {id:2} {tag} {name}: {} [{secs:.2}s]", o.detail);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
