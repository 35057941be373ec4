//! Throughput of the sparse simulator on a wide, low-support register.

use std::time::{Duration, Instant};

use dpoq_core::BitVec;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::state::{Gate, SparseState};

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub qubits: usize,
    pub support: usize,
    pub gates: u64,
    pub seconds: f64,
    pub gates_per_second: f64,
}

/// Applies random layers of X, CNOT and CZ to a `qubits`-wide state with
/// support 2 until `budget` elapses. H is left out so the support stays fixed.
pub fn sparse_throughput<R: Rng + ?Sized>(qubits: usize, budget: Duration, rng: &mut R) -> Result<BenchReport> {
    let a = BitVec::random(qubits, rng);
    let b = BitVec::random(qubits, rng);
    let mut st = SparseState::uniform(qubits, &[a, b])?;
    let mut gates = 0u64;
    let start = Instant::now();
    let mut order: Vec<usize> = (0..qubits).collect();
    while start.elapsed() < budget {
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let layer: Vec<Gate> = order
            .chunks_exact(2)
            .enumerate()
            .map(|(i, p)| match i % 3 {
                0 => Gate::Cnot {
                    control: p[0],
                    target: p[1],
                },
                1 => Gate::Cz(p[0], p[1]),
                _ => Gate::X(p[0]),
            })
            .collect();
        gates += layer.len() as u64;
        st.apply_layer(&layer)?;
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        qubits,
        support: st.support(),
        gates,
        seconds,
        gates_per_second: gates as f64 / seconds,
    })
}
