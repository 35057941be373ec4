//! The sparse simulator against a textbook dense state vector.

use dpoq_core::BitVec;
use dpoq_qsim::{Gate, SparseState};
use num_complex::Complex64;
use proptest::prelude::*;

const N: usize = 5;

fn apply_dense(psi: &mut [Complex64], g: Gate) {
    let bit = |i: usize, q: usize| (i >> q) & 1 == 1;
    let one_qubit = |psi: &mut [Complex64], q: usize, m: [[Complex64; 2]; 2]| {
        for i in 0..psi.len() {
            if !bit(i, q) {
                let j = i | 1 << q;
                let (a, b) = (psi[i], psi[j]);
                psi[i] = m[0][0] * a + m[0][1] * b;
                psi[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    };
    let r = |x: f64| Complex64::new(x, 0.0);
    match g {
        Gate::X(q) => one_qubit(psi, q, [[r(0.0), r(1.0)], [r(1.0), r(0.0)]]),
        Gate::Z(q) => one_qubit(psi, q, [[r(1.0), r(0.0)], [r(0.0), r(-1.0)]]),
        Gate::H(q) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            one_qubit(psi, q, [[r(h), r(h)], [r(h), r(-h)]])
        }
        Gate::Rx(q, t) => {
            let (s, c) = (t / 2.0).sin_cos();
            let mi = Complex64::new(0.0, -s);
            one_qubit(psi, q, [[r(c), mi], [mi, r(c)]])
        }
        Gate::Ry(q, t) => {
            let (s, c) = (t / 2.0).sin_cos();
            one_qubit(psi, q, [[r(c), r(-s)], [r(s), r(c)]])
        }
        Gate::Rz(q, t) => {
            let e = |x: f64| Complex64::from_polar(1.0, x);
            one_qubit(psi, q, [[e(-t / 2.0), r(0.0)], [r(0.0), e(t / 2.0)]])
        }
        Gate::Cnot { control, target } => {
            for i in 0..psi.len() {
                if bit(i, control) && !bit(i, target) {
                    psi.swap(i, i | 1 << target);
                }
            }
        }
        Gate::Ccnot { c0, c1, target } => {
            for i in 0..psi.len() {
                if bit(i, c0) && bit(i, c1) && !bit(i, target) {
                    psi.swap(i, i | 1 << target);
                }
            }
        }
        Gate::Cz(a, b) => {
            for (i, amp) in psi.iter_mut().enumerate() {
                if bit(i, a) && bit(i, b) {
                    *amp = -*amp;
                }
            }
        }
    }
}

fn to_dense(st: &SparseState) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << N];
    for (k, a) in st.iter() {
        psi[k.to_u64() as usize] = *a;
    }
    psi
}

fn gate() -> impl Strategy<Value = Gate> {
    let q = 0..N;
    let t = -3.2f64..3.2;
    prop_oneof![
        q.clone().prop_map(Gate::X),
        q.clone().prop_map(Gate::Z),
        q.clone().prop_map(Gate::H),
        (q.clone(), t.clone()).prop_map(|(q, t)| Gate::Rx(q, t)),
        (q.clone(), t.clone()).prop_map(|(q, t)| Gate::Ry(q, t)),
        (q.clone(), t).prop_map(|(q, t)| Gate::Rz(q, t)),
        proptest::sample::subsequence((0..N).collect::<Vec<_>>(), 2)
            .prop_shuffle()
            .prop_map(|v| Gate::Cnot { control: v[0], target: v[1] }),
        proptest::sample::subsequence((0..N).collect::<Vec<_>>(), 3)
            .prop_shuffle()
            .prop_map(|v| Gate::Ccnot { c0: v[0], c1: v[1], target: v[2] }),
        proptest::sample::subsequence((0..N).collect::<Vec<_>>(), 2).prop_map(|v| Gate::Cz(v[0], v[1])),
    ]
}

fn classical_gate() -> impl Strategy<Value = Gate> {
    gate().prop_filter("classical", |g| {
        matches!(g, Gate::X(_) | Gate::Z(_) | Gate::Cnot { .. } | Gate::Ccnot { .. } | Gate::Cz(..))
    })
}

proptest! {
    #[test]
    fn sparse_matches_dense(start in 0u64..32, gates in proptest::collection::vec(gate(), 1..25)) {
        let mut st = SparseState::basis(BitVec::from_u64(start, N));
        let mut psi = to_dense(&st);
        for g in gates {
            st.apply_gate(g).unwrap();
            apply_dense(&mut psi, g);
            prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-9);
        }
        let sparse = to_dense(&st);
        for (a, b) in sparse.iter().zip(&psi) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn classical_layers_preserve_support(
        keys in proptest::collection::btree_set(0u64..32, 1..8),
        gates in proptest::collection::vec(classical_gate(), 1..30),
    ) {
        let keys: Vec<BitVec> = keys.into_iter().map(|k| BitVec::from_u64(k, N)).collect();
        let mut st = SparseState::uniform(N, &keys).unwrap();
        let support = st.support();
        for g in gates {
            st.apply_gate(g).unwrap();
            prop_assert_eq!(st.support(), support);
            prop_assert!(st.is_normalized());
        }
    }
}
