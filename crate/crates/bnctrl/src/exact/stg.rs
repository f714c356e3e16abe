//! Explicit state transition graph over the free (unpinned) nodes.

use super::ExactError;
use crate::bn::{BooleanNetwork, NetworkState, PartialAssignment};

/// Default ceiling on explicit state counts: 24 free nodes.
pub const DEFAULT_STATE_CAP: usize = 1 << 24;

/// Parent count above which per-node truth tables fall back to direct
/// expression evaluation.
const TABLE_PARENT_LIMIT: usize = 22;

/// Per-node update function in packed-index space.
enum NodeFn {
    /// Bit `mask` of the packed index selects into the table.
    Table { masks: Vec<u32>, bits: Vec<u64> },
    /// Evaluate the predictor on the unpacked state.
    Direct,
}

/// The complete asynchronous STG of a network under an environmental
/// condition. States are the assignments of the free nodes, packed into
/// indices (free node `free[j]` is bit `j`); pinned nodes hold their pinned
/// value in every state.
pub struct ExplicitStg {
    net: BooleanNetwork,
    env: PartialAssignment,
    free: Vec<usize>,
    /// node index → position in `free`, or none if pinned.
    pos: Vec<Option<usize>>,
    n_states: usize,
    succ_off: Vec<u32>,
    succ: Vec<u32>,
}

impl std::fmt::Debug for ExplicitStg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExplicitStg")
            .field("nodes", &self.net.n_nodes())
            .field("free", &self.free)
            .field("states", &self.n_states)
            .field("edges", &self.succ.len())
            .finish()
    }
}

impl ExplicitStg {
    /// Build the explicit graph of `net` restricted under `env`. Fails if the
    /// free-node count implies more than `cap` states.
    pub fn build(
        net: &BooleanNetwork,
        env: &PartialAssignment,
        cap: usize,
    ) -> Result<ExplicitStg, ExactError> {
        let net = net.restrict(env)?;
        let n = net.n_nodes();
        let free: Vec<usize> = (0..n).filter(|&v| env.pin_of(v).is_none()).collect();
        let states_exact = 1u128 << free.len().min(127);
        if free.len() >= 64 || states_exact > cap as u128 {
            return Err(ExactError::TooLarge {
                free: free.len(),
                states: states_exact,
                cap,
            });
        }
        let n_states = 1usize << free.len();
        let mut pos = vec![None; n];
        for (j, &v) in free.iter().enumerate() {
            pos[v] = Some(j);
        }

        // Per free node, an update function over packed indices. Parents of a
        // restricted network are always free nodes.
        let mut fns = Vec::with_capacity(free.len());
        for &v in &free {
            let parents = net.parents(v);
            if parents.len() <= TABLE_PARENT_LIMIT {
                let masks: Vec<u32> = parents
                    .iter()
                    .map(|&p| 1u32 << pos[p].expect("parent of restricted net is free"))
                    .collect();
                let rows = 1usize << parents.len();
                let mut bits = vec![0u64; rows.div_ceil(64)];
                let mut scratch = NetworkState::zeros(n);
                for (v2, pin) in env.iter() {
                    scratch.set(v2, pin);
                }
                for row in 0..rows {
                    for (j, &p) in parents.iter().enumerate() {
                        scratch.set(p, (row >> j) & 1 == 1);
                    }
                    if net.eval_node(v, &scratch) {
                        bits[row / 64] |= 1u64 << (row % 64);
                    }
                }
                fns.push(NodeFn::Table { masks, bits });
            } else {
                fns.push(NodeFn::Direct);
            }
        }

        let stg_shell = ExplicitStg {
            net,
            env: env.clone(),
            free,
            pos,
            n_states,
            succ_off: Vec::new(),
            succ: Vec::new(),
        };

        let mut succ_off = Vec::with_capacity(n_states + 1);
        let mut succ = Vec::new();
        succ_off.push(0u32);
        let mut row: Vec<u32> = Vec::with_capacity(stg_shell.free.len() + 1);
        for idx in 0..n_states as u32 {
            row.clear();
            let mut stutter = stg_shell.free.len() < stg_shell.net.n_nodes();
            for (j, f) in fns.iter().enumerate() {
                let bit = match f {
                    NodeFn::Table { masks, bits } => {
                        let mut r = 0usize;
                        for (k, m) in masks.iter().enumerate() {
                            if idx & m != 0 {
                                r |= 1 << k;
                            }
                        }
                        bits[r / 64] >> (r % 64) & 1 == 1
                    }
                    NodeFn::Direct => {
                        let s = stg_shell.unpack(idx);
                        stg_shell.net.eval_node(stg_shell.free[j], &s)
                    }
                };
                if bit != (idx >> j & 1 == 1) {
                    row.push(idx ^ (1u32 << j));
                } else {
                    stutter = true;
                }
            }
            if stutter {
                row.push(idx);
            }
            row.sort_unstable();
            row.dedup();
            succ.extend_from_slice(&row);
            succ_off.push(succ.len() as u32);
        }

        Ok(ExplicitStg {
            succ_off,
            succ,
            ..stg_shell
        })
    }

    pub fn network(&self) -> &BooleanNetwork {
        &self.net
    }

    pub fn env(&self) -> &PartialAssignment {
        &self.env
    }

    /// Free node indices, ascending; bit `j` of a packed index is node
    /// `free()[j]`.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Distinct asynchronous successors of the packed state, ascending;
    /// includes the state itself iff some node update is a no-op.
    pub fn successors(&self, idx: u32) -> &[u32] {
        &self.succ[self.succ_off[idx as usize] as usize..self.succ_off[idx as usize + 1] as usize]
    }

    /// Packed index of a full network state; pinned bits are ignored.
    pub fn pack(&self, s: &NetworkState) -> u32 {
        let mut idx = 0u32;
        for (j, &v) in self.free.iter().enumerate() {
            if s.get(v) {
                idx |= 1 << j;
            }
        }
        idx
    }

    /// Full network state for a packed index, with pinned nodes at their
    /// pinned values.
    pub fn unpack(&self, idx: u32) -> NetworkState {
        let mut s = NetworkState::zeros(self.net.n_nodes());
        for (v, pin) in self.env.iter() {
            s.set(v, pin);
        }
        for (j, &v) in self.free.iter().enumerate() {
            if idx >> j & 1 == 1 {
                s.set(v, true);
            }
        }
        s
    }

    /// Position of node `v` among the free nodes, if unpinned.
    pub fn free_pos(&self, v: usize) -> Option<usize> {
        self.pos[v]
    }

    /// Count of nodes (over all n, stutters included) whose update maps
    /// `from` to each distinct successor; used for transition probabilities.
    /// Returns (successor index, node count) pairs, ascending by index.
    pub fn transition_counts(&self, from: u32) -> Vec<(u32, u32)> {
        let n = self.net.n_nodes();
        let s = self.unpack(from);
        let mut out: Vec<(u32, u32)> = Vec::new();
        let mut bump = |idx: u32| match out.iter_mut().find(|(i, _)| *i == idx) {
            Some((_, c)) => *c += 1,
            None => out.push((idx, 1)),
        };
        for v in 0..n {
            match self.pos[v] {
                None => bump(from),
                Some(j) => {
                    let bit = self.net.eval_node(v, &s);
                    if bit != (from >> j & 1 == 1) {
                        bump(from ^ (1u32 << j));
                    } else {
                        bump(from);
                    }
                }
            }
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        out
    }
}
