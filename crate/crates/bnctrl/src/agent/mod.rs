//! Attractor-target control as a reinforcement learning problem.
//!
//! Episodes run over pseudo-attractor states: reset picks a registered
//! state that does not satisfy the target, each step applies a flip set of
//! up to five nodes and lets the dynamics settle back onto a PA state, and
//! the episode ends on target alignment or after 100 actions. The agent is
//! a branching dueling Q-network trained off prioritized replay.

mod env;
mod replay;
mod train;

pub use env::{ControlEnvironment, StepOutcome};
pub use replay::{PrioritizedReplay, SampledBatch};
pub use train::{train, BdqAgent, LinearSchedule, TrainConfig, TrainResult};

use crate::bn::{BooleanNetwork, NetworkState, PartialAssignment};
use crate::neural::{NeuralError, Tensor};
use crate::pasip::PasipError;

/// Per-branch choices: entry d is branch d's pick, 0 for no-op or
/// 1 + (index into the perturbable node list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub choices: Vec<usize>,
}

/// The factored action set: each of `branches` branches chooses among
/// {no-op} ∪ perturbable nodes. Duplicate picks collapse, so a decoded flip
/// set never exceeds the branch count and never touches target-pinned
/// nodes (they are excluded from the perturbable list up front).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    perturbable: Vec<usize>,
    branches: usize,
}

impl ActionSpace {
    pub fn new(
        net: &BooleanNetwork,
        target: &PartialAssignment,
        include_inputs: bool,
        branches: usize,
    ) -> Self {
        let perturbable = (0..net.n_nodes())
            .filter(|&i| target.pin_of(i).is_none())
            .filter(|&i| include_inputs || !net.is_input(i))
            .collect();
        ActionSpace {
            perturbable,
            branches,
        }
    }

    pub fn from_parts(perturbable: Vec<usize>, branches: usize) -> Self {
        ActionSpace {
            perturbable,
            branches,
        }
    }

    pub fn perturbable(&self) -> &[usize] {
        &self.perturbable
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    /// Options per branch: the no-op plus every perturbable node.
    pub fn n_options(&self) -> usize {
        self.perturbable.len() + 1
    }

    /// Decode branch choices to the sorted, deduplicated set of node ids to
    /// flip.
    pub fn decode(&self, action: &Action) -> Vec<usize> {
        let mut flips: Vec<usize> = action
            .choices
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| self.perturbable[c - 1])
            .collect();
        flips.sort_unstable();
        flips.dedup();
        flips
    }
}

/// One stored experience.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: NetworkState,
    pub choices: Vec<usize>,
    pub reward: f64,
    pub next: NetworkState,
    pub done: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("every registered pseudo-attractor state already satisfies the target")]
    AllAligned,
    #[error("source state is not a registered pseudo-attractor state")]
    UnknownSource,
    #[error("source state already satisfies the target")]
    AlignedSource,
    #[error("replay buffer holds {len} items, batch needs {need}")]
    ReplayUnderfull { len: usize, need: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("checkpoint does not fit this model: {0}")]
    CheckpointMismatch(String),
    #[error(transparent)]
    Pasip(#[from] PasipError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// Stack network states into a [B×n] feature tensor of 0/1 entries.
pub fn state_features(states: &[&NetworkState], n_nodes: usize) -> Tensor {
    let mut data = Vec::with_capacity(states.len() * n_nodes);
    for s in states {
        for i in 0..n_nodes {
            data.push(if s.get(i) { 1.0 } else { 0.0 });
        }
    }
    Tensor::from_vec(states.len(), n_nodes, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::parse_bnet;

    fn net3() -> BooleanNetwork {
        parse_bnet("targets, factors\nx1, x1\nx2, x1 | x3\nx3, x2 & x3\n").unwrap()
    }

    #[test]
    fn space_excludes_target_pins() {
        let net = net3();
        let target = net.parse_assignment("x2=0").unwrap();
        let space = ActionSpace::new(&net, &target, true, 5);
        assert_eq!(space.perturbable(), &[0, 2]);
        assert_eq!(space.n_options(), 3);
    }

    #[test]
    fn space_can_freeze_inputs() {
        let net = net3();
        let target = net.parse_assignment("x2=0").unwrap();
        let space = ActionSpace::new(&net, &target, false, 5);
        // x1 is an input node
        assert_eq!(space.perturbable(), &[2]);
    }

    #[test]
    fn decode_dedups_and_sorts() {
        let net = net3();
        let target = net.parse_assignment("x2=0").unwrap();
        let space = ActionSpace::new(&net, &target, true, 5);
        let a = Action {
            choices: vec![2, 0, 1, 2, 1],
        };
        assert_eq!(space.decode(&a), vec![0, 2]);
        let noop = Action {
            choices: vec![0; 5],
        };
        assert!(space.decode(&noop).is_empty());
    }

    #[test]
    fn decode_never_exceeds_branch_count() {
        let net = net3();
        let space = ActionSpace::new(&net, &PartialAssignment::empty(), true, 5);
        let a = Action {
            choices: vec![1, 2, 3, 3, 2],
        };
        assert!(space.decode(&a).len() <= 5);
    }

    #[test]
    fn features_are_binary_rows() {
        let s1 = NetworkState::from_u64(3, 0b101);
        let s2 = NetworkState::from_u64(3, 0b010);
        let t = state_features(&[&s1, &s2], 3);
        assert_eq!(t.data(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }
}
