//! Asynchronous update semantics: successor sets, stochastic simulation,
//! perturbations, and explicit forward reachability.
//!
//! One uniformly chosen node is updated per step; choosing a node whose
//! update does not change the state is an ordinary (stuttering) step.

use crate::bn::{BooleanNetwork, NetworkState};
use crate::rng::RngStream;
use std::collections::HashMap;
use std::fmt::Write as _;

/// Default ceiling for [`reach_set`], sized so explicit analysis stays within
/// desk memory while covering every instance with up to 24 free nodes.
pub const DEFAULT_REACH_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynError {
    #[error("reachable set exceeds the cap of {cap} states")]
    CapacityExceeded { cap: usize },
}

/// What [`simulate`] keeps besides the final state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordMode {
    /// Final state only.
    Off,
    /// Per-state visit counts (memory bounded by distinct states seen).
    Counts,
    /// Full state sequence plus visit counts.
    Full,
}

/// Result of a simulation run. `states` is populated only under
/// [`RecordMode::Full`]; `counts` under `Counts` and `Full`, where the counts
/// sum to `steps + 1` (the start state is visited too).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: NetworkState,
    pub end: NetworkState,
    pub steps: usize,
    pub states: Vec<NetworkState>,
    pub counts: HashMap<NetworkState, u64>,
}

impl Trajectory {
    /// CSV dump `step,state_hex`, one row per visited state. Requires the
    /// run to have used [`RecordMode::Full`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,state_hex\n");
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i, s.to_hex());
        }
        out
    }
}

/// All states reachable from `s` by a single asynchronous update, sorted and
/// deduplicated; contains `s` itself iff some node's update is a no-op.
pub fn async_successors(net: &BooleanNetwork, s: &NetworkState) -> Vec<NetworkState> {
    let n = net.n_nodes();
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let bit = net.eval_node(v, s);
        if bit != s.get(v) {
            let mut t = s.clone();
            t.set(v, bit);
            out.push(t);
        } else if !out.contains(s) {
            out.push(s.clone());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// True iff every predictor reproduces the current value.
pub fn is_fixed_point(net: &BooleanNetwork, s: &NetworkState) -> bool {
    (0..net.n_nodes()).all(|v| net.eval_node(v, s) == s.get(v))
}

/// One asynchronous step in place: a node index drawn uniformly (no-op
/// updates allowed), that node set to its predictor value. Returns the index.
pub fn async_step_in_place(net: &BooleanNetwork, s: &mut NetworkState, rng: &mut RngStream) -> usize {
    let v = rng.index(net.n_nodes());
    let bit = net.eval_node(v, s);
    s.set(v, bit);
    v
}

/// One asynchronous step, returning the successor state.
pub fn async_step(net: &BooleanNetwork, s: &NetworkState, rng: &mut RngStream) -> NetworkState {
    let mut t = s.clone();
    async_step_in_place(net, &mut t, rng);
    t
}

/// `s` with exactly the listed bits inverted. Duplicate indices cancel.
pub fn perturb(s: &NetworkState, flips: &[usize]) -> NetworkState {
    let mut t = s.clone();
    for &v in flips {
        t.flip(v);
    }
    t
}

/// Run `steps` asynchronous updates from `s0`, recording per `record`.
pub fn simulate(
    net: &BooleanNetwork,
    s0: &NetworkState,
    steps: usize,
    rng: &mut RngStream,
    record: RecordMode,
) -> Trajectory {
    let mut counts: HashMap<NetworkState, u64> = HashMap::new();
    let mut states = Vec::new();
    let mut cur = s0.clone();
    if record != RecordMode::Off {
        counts.insert(cur.clone(), 1);
        if record == RecordMode::Full {
            states.reserve(steps + 1);
            states.push(cur.clone());
        }
    }
    for _ in 0..steps {
        async_step_in_place(net, &mut cur, rng);
        if record != RecordMode::Off {
            *counts.entry(cur.clone()).or_insert(0) += 1;
            if record == RecordMode::Full {
                states.push(cur.clone());
            }
        }
    }
    Trajectory {
        start: s0.clone(),
        end: cur,
        steps,
        states,
        counts,
    }
}

/// Forward BFS closure of `s` under asynchronous updates, sorted. Errors if
/// the set would exceed `cap` states.
pub fn reach_set(
    net: &BooleanNetwork,
    s: &NetworkState,
    cap: usize,
) -> Result<Vec<NetworkState>, DynError> {
    let mut seen: std::collections::HashSet<NetworkState> = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert(s.clone());
    queue.push_back(s.clone());
    while let Some(cur) = queue.pop_front() {
        for next in async_successors(net, &cur) {
            if !seen.contains(&next) {
                if seen.len() >= cap {
                    return Err(DynError::CapacityExceeded { cap });
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<NetworkState> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}
