//! Episode semantics over pseudo-attractor states.

use super::{Action, ActionSpace, AgentError};
use crate::bn::{BooleanNetwork, NetworkState, PartialAssignment};
use crate::dynamics::perturb;
use crate::pasip::{evolve_to_pa, OnlineDetector, PaRegistry, PasipConfig, PasipError};
use crate::rng::RngStream;

pub const MAX_ACTIONS_DEFAULT: u32 = 100;

/// Reinforcement-learning view of the control problem. Holds the restricted
/// network, the target, the (growing) PA registry, and the online detector
/// that keeps watching the dynamics during training rollouts.
#[derive(Debug)]
pub struct ControlEnvironment {
    net: BooleanNetwork,
    target: PartialAssignment,
    space: ActionSpace,
    registry: PaRegistry,
    detector: OnlineDetector,
    evolve_budget: u64,
    current: NetworkState,
    actions_taken: u32,
    max_actions: u32,
    active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: NetworkState,
    pub reward: f64,
    pub done: bool,
    pub aligned: bool,
    /// Simulation steps spent settling back onto a PA state.
    pub settle_steps: u64,
}

impl ControlEnvironment {
    /// `net` must already be restricted to the environmental condition;
    /// `registry` is the scan output for that condition.
    pub fn new(
        net: BooleanNetwork,
        target: PartialAssignment,
        registry: PaRegistry,
        pasip: &PasipConfig,
        include_inputs: bool,
        branches: usize,
    ) -> Result<Self, AgentError> {
        pasip.validate()?;
        for (node, _) in target.iter() {
            if node >= net.n_nodes() {
                return Err(AgentError::BadConfig(format!(
                    "target pins node {node}, model has {}",
                    net.n_nodes()
                )));
            }
        }
        let space = ActionSpace::new(&net, &target, include_inputs, branches);
        let n = net.n_nodes();
        Ok(ControlEnvironment {
            net,
            target,
            space,
            registry,
            detector: OnlineDetector::new(pasip),
            evolve_budget: pasip.evolve_budget,
            current: NetworkState::zeros(n),
            actions_taken: 0,
            max_actions: MAX_ACTIONS_DEFAULT,
            active: false,
        })
    }

    pub fn network(&self) -> &BooleanNetwork {
        &self.net
    }

    pub fn target(&self) -> &PartialAssignment {
        &self.target
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn registry(&self) -> &PaRegistry {
        &self.registry
    }

    pub fn current(&self) -> &NetworkState {
        &self.current
    }

    pub fn actions_taken(&self) -> u32 {
        self.actions_taken
    }

    pub fn max_actions(&self) -> u32 {
        self.max_actions
    }

    pub fn episode_active(&self) -> bool {
        self.active
    }

    /// Start an episode from a uniformly chosen registered state that does
    /// not satisfy the target.
    pub fn reset(&mut self, rng: &mut RngStream) -> Result<NetworkState, AgentError> {
        let mis = self.registry.misaligned(&self.target);
        if mis.is_empty() {
            return Err(AgentError::AllAligned);
        }
        let pick = mis[rng.index(mis.len())];
        self.current = self.registry.get(pick).state.clone();
        self.actions_taken = 0;
        self.active = true;
        Ok(self.current.clone())
    }

    /// Start an episode from a specific registered, misaligned state.
    pub fn begin_episode_at(&mut self, source: &NetworkState) -> Result<(), AgentError> {
        if !self.registry.contains(source) {
            return Err(AgentError::UnknownSource);
        }
        if self.target.matches(source) {
            return Err(AgentError::AlignedSource);
        }
        self.current = source.clone();
        self.actions_taken = 0;
        self.active = true;
        Ok(())
    }

    /// Apply an action: flip the decoded node set, let the dynamics settle
    /// onto the next PA state, and score the move. The reward is
    /// 21 + 100·[aligned] − |flips|, positive by construction. The episode
    /// ends on alignment or at the action cap. If settling exhausts its
    /// budget the episode aborts and the error is returned; nothing about
    /// the environment remains mid-episode.
    pub fn step(&mut self, action: &Action, rng: &mut RngStream) -> Result<StepOutcome, AgentError> {
        assert!(self.active, "step outside an episode");
        assert_eq!(action.choices.len(), self.space.branches(), "branch count");
        let flips = self.space.decode(action);
        let perturbed = perturb(&self.current, &flips);
        let settled = evolve_to_pa(
            &self.net,
            &perturbed,
            &mut self.registry,
            &mut self.detector,
            rng,
            self.evolve_budget,
        );
        let (next, settle_steps) = match settled {
            Ok(v) => v,
            Err(e @ PasipError::EvolveBudget { .. }) => {
                self.active = false;
                return Err(AgentError::Pasip(e));
            }
            Err(e) => return Err(AgentError::Pasip(e)),
        };
        self.actions_taken += 1;
        let aligned = self.target.matches(&next);
        let reward = 21.0 + if aligned { 100.0 } else { 0.0 } - flips.len() as f64;
        let done = aligned || self.actions_taken >= self.max_actions;
        self.current = next.clone();
        if done {
            self.active = false;
        }
        Ok(StepOutcome {
            next,
            reward,
            done,
            aligned,
            settle_steps,
        })
    }
}
