//! The growing, deduplicated set of pseudo-attractor states.

use crate::bn::{HexError, NetworkState, PartialAssignment};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Which identification step found a state. Serialized with the step names
/// used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    /// Offline scan, dominant state of a counting window.
    #[serde(rename = "I-1")]
    ScanDominant,
    /// Offline scan, large-attractor checkpoint representative.
    #[serde(rename = "I-2")]
    ScanCheckpoint,
    /// Online, verified fixed point after a dwell streak.
    #[serde(rename = "II-1")]
    OnlineFixedPoint,
    /// Online, frequently revisited state of a full history window.
    #[serde(rename = "II-2")]
    OnlineRevisit,
    /// Online, large-attractor checkpoint representative.
    #[serde(rename = "II-3")]
    OnlineCheckpoint,
    /// Taken from the exact stationary analysis.
    #[serde(rename = "exact")]
    Exact,
}

/// One registered pseudo-attractor state with discovery metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PaRecord {
    pub state: NetworkState,
    pub provenance: Provenance,
    /// Fraction of its discovery window the state occupied (1.0 for fixed
    /// points, exact stationary probability for `exact` entries).
    pub visit_share: f64,
    /// Global step index at registration.
    pub step_found: u64,
}

#[derive(Serialize, Deserialize)]
struct RecordRepr {
    state_hex: String,
    provenance: Provenance,
    visit_share: f64,
    step_found: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("malformed registry JSON: {0}")]
    Json(String),
    #[error("bad state encoding: {0}")]
    Hex(#[from] HexError),
    #[error("duplicate state {state_hex}")]
    Duplicate { state_hex: String },
}

/// Insertion-ordered, deduplicated registry. Provenance and metadata are
/// immutable once a state is in; later sightings of the same state are
/// ignored.
#[derive(Debug, Clone, Default)]
pub struct PaRegistry {
    records: Vec<PaRecord>,
    index: HashMap<NetworkState, usize>,
}

impl PaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a state. Returns true iff it was new.
    pub fn insert(
        &mut self,
        state: NetworkState,
        provenance: Provenance,
        visit_share: f64,
        step_found: u64,
    ) -> bool {
        if self.index.contains_key(&state) {
            return false;
        }
        self.index.insert(state.clone(), self.records.len());
        self.records.push(PaRecord {
            state,
            provenance,
            visit_share,
            step_found,
        });
        true
    }

    pub fn contains(&self, state: &NetworkState) -> bool {
        self.index.contains_key(state)
    }

    pub fn position(&self, state: &NetworkState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, i: usize) -> &PaRecord {
        &self.records[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &PaRecord> {
        self.records.iter()
    }

    pub fn states(&self) -> impl Iterator<Item = &NetworkState> {
        self.records.iter().map(|r| &r.state)
    }

    /// Indices of registered states that do not match `target`, in
    /// registration order.
    pub fn misaligned(&self, target: &PartialAssignment) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| !target.matches(&r.state))
            .map(|(i, _)| i)
            .collect()
    }

    /// Stable JSON array in registration order.
    pub fn to_json(&self) -> String {
        let repr: Vec<RecordRepr> = self
            .records
            .iter()
            .map(|r| RecordRepr {
                state_hex: r.state.to_hex(),
                provenance: r.provenance,
                visit_share: r.visit_share,
                step_found: r.step_found,
            })
            .collect();
        serde_json::to_string_pretty(&repr).expect("registry serialization cannot fail")
    }

    pub fn from_json(text: &str, n_nodes: usize) -> Result<PaRegistry, RegistryError> {
        let repr: Vec<RecordRepr> =
            serde_json::from_str(text).map_err(|e| RegistryError::Json(e.to_string()))?;
        let mut out = PaRegistry::new();
        for r in repr {
            let state = NetworkState::from_hex(n_nodes, &r.state_hex)?;
            if !out.insert(state, r.provenance, r.visit_share, r.step_found) {
                return Err(RegistryError::Duplicate {
                    state_hex: r.state_hex,
                });
            }
        }
        Ok(out)
    }
}
