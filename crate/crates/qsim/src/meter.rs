//! Depth and interleaving accounting.
//!
//! A unitary layer and a measurement layer each count as one layer; a
//! classical computation whose result conditions later quantum operations
//! (or a message exchange) counts as one interleaving.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::state::Gate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Unitary,
    Measurement,
    Interleave,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeterEvent {
    pub kind: EventKind,
    pub label: String,
    /// Gate name to count.
    pub census: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthMeter {
    pub layers: usize,
    pub interleavings: usize,
    pub events: Vec<MeterEvent>,
}

impl DepthMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unitary(&mut self, label: &str, gates: &[Gate]) {
        let mut census = BTreeMap::new();
        for g in gates {
            *census.entry(g.name().to_string()).or_insert(0) += 1;
        }
        self.unitary_census(label, census);
    }

    pub fn unitary_census(&mut self, label: &str, census: BTreeMap<String, usize>) {
        self.layers += 1;
        self.events.push(MeterEvent {
            kind: EventKind::Unitary,
            label: label.into(),
            census,
        });
    }

    pub fn measurement(&mut self, label: &str, qubits: usize) {
        self.layers += 1;
        self.events.push(MeterEvent {
            kind: EventKind::Measurement,
            label: label.into(),
            census: BTreeMap::from([("M".to_string(), qubits)]),
        });
    }

    pub fn interleave(&mut self, label: &str) {
        self.interleavings += 1;
        self.events.push(MeterEvent {
            kind: EventKind::Interleave,
            label: label.into(),
            census: BTreeMap::new(),
        });
    }

    pub fn append(&mut self, other: &DepthMeter) {
        self.layers += other.layers;
        self.interleavings += other.interleavings;
        self.events.extend(other.events.iter().cloned());
    }

    pub fn totals(&self) -> (usize, usize) {
        (self.layers, self.interleavings)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("meter serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_convention() {
        let mut m = DepthMeter::new();
        m.unitary("h", &[Gate::H(0), Gate::H(1)]);
        m.measurement("m", 2);
        m.interleave("report");
        assert_eq!(m.totals(), (2, 1));
        assert_eq!(m.events[0].census["H"], 2);
        let v = m.to_json();
        assert_eq!(v["layers"], 2);
        assert_eq!(v["events"][2]["kind"], "interleave");
    }
}
