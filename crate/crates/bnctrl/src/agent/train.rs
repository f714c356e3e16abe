//! BDQ training loop: ε-greedy rollouts, prioritized replay, double-Q
//! targets, Adam updates and Polyak-averaged target parameters.

use super::env::ControlEnvironment;
use super::replay::PrioritizedReplay;
use super::{state_features, Action, ActionSpace, AgentError, Transition};
use crate::bn::{BooleanNetwork, NetworkState, PartialAssignment};
use crate::neural::{bdq_loss, bdq_targets, soft_update, AdamState, BdqArch, BdqNetwork};
use crate::pasip::PasipError;
use crate::rng::RngStream;
use std::fmt::Write as _;

/// Linear interpolation from `start` to `end` over `horizon` steps, clamped
/// at `end` afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSchedule {
    pub start: f64,
    pub end: f64,
    pub horizon: u64,
}

impl LinearSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.horizon == 0 || step >= self.horizon {
            return self.end;
        }
        let t = step as f64 / self.horizon as f64;
        self.start + (self.end - self.start) * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Environment step budget.
    pub steps: u64,
    /// Transitions collected before the first gradient update.
    pub warmup: usize,
    pub batch: usize,
    pub replay_capacity: usize,
    pub per_alpha: f64,
    pub per_beta_start: f64,
    pub per_beta_end: f64,
    pub per_floor: f64,
    pub gamma: f64,
    pub lr: f64,
    pub clip: f64,
    pub tau: f64,
    /// Gradient updates happen every this many environment steps.
    pub update_every: u64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_horizon: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 50_000,
            warmup: 1_000,
            batch: 128,
            replay_capacity: 1_000_000,
            per_alpha: 0.6,
            per_beta_start: 0.4,
            per_beta_end: 1.0,
            per_floor: 1e-3,
            gamma: 0.99,
            lr: 1e-4,
            clip: 10.0,
            tau: 0.01,
            update_every: 1,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_horizon: 1_000_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::BadConfig(m.to_string()));
        if self.batch == 0 {
            return bad("batch must be positive");
        }
        if self.replay_capacity < self.batch {
            return bad("replay capacity below batch size");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma outside [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau outside [0, 1]");
        }
        if self.per_alpha < 0.0 || !self.per_alpha.is_finite() {
            return bad("per_alpha must be non-negative");
        }
        if self.per_floor <= 0.0 {
            return bad("per_floor must be positive");
        }
        if !(0.0..=1.0).contains(&self.per_beta_start)
            || !(0.0..=1.0).contains(&self.per_beta_end)
            || self.per_beta_start > self.per_beta_end
        {
            return bad("per_beta must satisfy 0 <= start <= end <= 1");
        }
        if !(0.0..=1.0).contains(&self.eps_start)
            || !(0.0..=1.0).contains(&self.eps_end)
            || self.eps_end > self.eps_start
        {
            return bad("epsilon must satisfy 0 <= end <= start <= 1");
        }
        if self.lr <= 0.0 || self.clip <= 0.0 {
            return bad("lr and clip must be positive");
        }
        if self.update_every == 0 {
            return bad("update_every must be positive");
        }
        Ok(())
    }
}

/// A BDQ network bound to the action encoding it was trained with.
#[derive(Debug)]
pub struct BdqAgent {
    pub net: BdqNetwork,
    space: ActionSpace,
}

impl BdqAgent {
    pub fn new(
        model: &BooleanNetwork,
        target: &PartialAssignment,
        include_inputs: bool,
        arch: &BdqArch,
        rng: &mut RngStream,
    ) -> Self {
        let space = ActionSpace::new(model, target, include_inputs, arch.branches);
        let net = BdqNetwork::new(
            model.n_nodes(),
            model.structure_edges(),
            space.n_options(),
            arch,
            rng,
        );
        BdqAgent { net, space }
    }

    /// Rebind a deserialized network to an action space, checking shapes.
    pub fn from_network(net: BdqNetwork, space: ActionSpace) -> Result<Self, AgentError> {
        if net.branches() != space.branches() {
            return Err(AgentError::CheckpointMismatch(format!(
                "checkpoint has {} branches, action space has {}",
                net.branches(),
                space.branches()
            )));
        }
        if net.n_actions() != space.n_options() {
            return Err(AgentError::CheckpointMismatch(format!(
                "checkpoint has {} options per branch, action space has {}",
                net.n_actions(),
                space.n_options()
            )));
        }
        Ok(BdqAgent { net, space })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    /// Per-branch independent ε-greedy: each branch explores uniformly over
    /// its options with probability ε, else takes that branch's argmax. The
    /// exploration flags are drawn before any uniform draws so the stream
    /// layout does not depend on the Q values.
    pub fn select_action(&self, state: &NetworkState, eps: f64, rng: &mut RngStream) -> Action {
        let d = self.space.branches();
        let n_opt = self.space.n_options();
        let explore: Vec<bool> = (0..d).map(|_| rng.chance(eps)).collect();
        let greedy = if explore.iter().all(|&e| e) {
            vec![0; d]
        } else {
            self.greedy_choices(state)
        };
        let choices = explore
            .iter()
            .zip(greedy)
            .map(|(&e, g)| if e { rng.index(n_opt) } else { g })
            .collect();
        Action { choices }
    }

    pub fn greedy_action(&self, state: &NetworkState) -> Action {
        Action {
            choices: self.greedy_choices(state),
        }
    }

    fn greedy_choices(&self, state: &NetworkState) -> Vec<usize> {
        let x = state_features(&[state], self.net.n_nodes());
        let cache = self
            .net
            .forward(&self.net.online, &x)
            .expect("finite parameters");
        cache.greedy().swap_remove(0)
    }
}

#[derive(Debug)]
pub struct TrainResult {
    /// CSV log, one row per environment step.
    pub log: String,
    /// Completed episodes (aborted ones included).
    pub episodes: u64,
    /// Episodes that ended aligned with the target.
    pub successes: u64,
    /// Episodes cut short by an exhausted evolve budget.
    pub aborted: u64,
    pub steps: u64,
}

const LOG_HEADER: &str = "step,episode,ep_len,ep_success,loss,epsilon,beta,registry_size";

/// Run the training loop for `cfg.steps` environment steps. The agent's
/// online and target parameters are updated in place; the environment's
/// registry may grow as the detector finds new pseudo-attractor states.
pub fn train(
    agent: &mut BdqAgent,
    env: &mut ControlEnvironment,
    cfg: &TrainConfig,
    rng: &mut RngStream,
) -> Result<TrainResult, AgentError> {
    cfg.validate()?;
    if agent.net.n_nodes() != env.network().n_nodes() {
        return Err(AgentError::BadConfig(format!(
            "agent built for {} nodes, environment has {}",
            agent.net.n_nodes(),
            env.network().n_nodes()
        )));
    }
    if agent.space.perturbable() != env.space().perturbable()
        || agent.space.branches() != env.space().branches()
    {
        return Err(AgentError::BadConfig(
            "agent and environment action spaces differ".to_string(),
        ));
    }

    let mut log = String::from(LOG_HEADER);
    log.push('\n');
    let mut result = TrainResult {
        log: String::new(),
        episodes: 0,
        successes: 0,
        aborted: 0,
        steps: 0,
    };
    if cfg.steps == 0 {
        result.log = log;
        return Ok(result);
    }

    let mut reset_rng = rng.substream("resets");
    let mut act_rng = rng.substream("actions");
    let mut sim_rng = rng.substream("evolve");
    let mut rep_rng = rng.substream("replay");

    let eps_schedule = LinearSchedule {
        start: cfg.eps_start,
        end: cfg.eps_end,
        horizon: cfg.eps_horizon,
    };
    let beta_schedule = LinearSchedule {
        start: cfg.per_beta_start,
        end: cfg.per_beta_end,
        horizon: cfg.steps,
    };
    let mut replay: PrioritizedReplay<Transition> =
        PrioritizedReplay::new(cfg.replay_capacity, cfg.per_alpha, cfg.per_floor);
    let mut adam = AdamState::new(agent.net.n_params(), cfg.lr, cfg.clip);
    let learn_after = cfg.warmup.max(cfg.batch);

    env.reset(&mut reset_rng)?;
    let mut episode: u64 = 1;
    let mut ep_len: u32 = 0;

    for step in 1..=cfg.steps {
        let eps = eps_schedule.value(step - 1);
        let beta = beta_schedule.value(step - 1);
        let state = env.current().clone();
        let action = agent.select_action(&state, eps, &mut act_rng);

        let mut ep_done = false;
        let mut ep_success = 0u8;
        match env.step(&action, &mut sim_rng) {
            Ok(out) => {
                ep_len += 1;
                replay.push(Transition {
                    state,
                    choices: action.choices,
                    reward: out.reward,
                    next: out.next,
                    done: out.done,
                });
                if out.done {
                    ep_done = true;
                    if out.aligned {
                        ep_success = 1;
                        result.successes += 1;
                    }
                }
            }
            Err(AgentError::Pasip(PasipError::EvolveBudget { .. })) => {
                // simulator limit, not dynamics: drop the transition and
                // start a fresh episode
                ep_len += 1;
                ep_done = true;
                result.aborted += 1;
            }
            Err(e) => return Err(e),
        }

        let mut loss = 0.0;
        if replay.len() >= learn_after && step % cfg.update_every == 0 {
            let batch = replay.sample(cfg.batch, beta, &mut rep_rng)?;
            let n = agent.net.n_nodes();
            let states: Vec<&NetworkState> = batch.items.iter().map(|t| &t.state).collect();
            let nexts: Vec<&NetworkState> = batch.items.iter().map(|t| &t.next).collect();
            let x = state_features(&states, n);
            let x_next = state_features(&nexts, n);
            let rewards: Vec<f64> = batch.items.iter().map(|t| t.reward).collect();
            let done: Vec<bool> = batch.items.iter().map(|t| t.done).collect();
            let actions: Vec<usize> = batch
                .items
                .iter()
                .flat_map(|t| t.choices.iter().copied())
                .collect();
            let y = bdq_targets(&agent.net, &x_next, &rewards, &done, cfg.gamma)?;
            let out = bdq_loss(
                &agent.net,
                &agent.net.online,
                &x,
                &actions,
                &y,
                &batch.weights,
                true,
            )?;
            let mut grads = out.grads.expect("gradients requested");
            adam.step(&mut agent.net.online, &mut grads)?;
            replay.update_priorities(&batch.indices, &out.td_abs);
            soft_update(&mut agent.net.target, &agent.net.online, cfg.tau);
            loss = out.loss;
        }

        writeln!(
            log,
            "{step},{episode},{ep_len},{ep_success},{loss:.6e},{eps:.6},{beta:.6},{}",
            env.registry().len()
        )
        .expect("writing to a string cannot fail");

        if ep_done {
            result.episodes += 1;
            episode += 1;
            ep_len = 0;
            env.reset(&mut reset_rng)?;
        }
        result.steps = step;
    }
    result.log = log;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::parse_bnet;
    use crate::pasip::{PaRegistry, PasipConfig, Provenance};

    fn net3() -> BooleanNetwork {
        parse_bnet("targets, factors\nx1, x1\nx2, x1 | x3\nx3, x2 & x3\n").unwrap()
    }

    fn registry_all_four() -> PaRegistry {
        let mut reg = PaRegistry::new();
        for w in [0b000u64, 0b110, 0b011, 0b111] {
            reg.insert(NetworkState::from_u64(3, w), Provenance::Exact, 1.0, 0);
        }
        reg
    }

    fn tiny_arch() -> BdqArch {
        BdqArch {
            conv_widths: vec![4],
            kernel_hidden: 4,
            trunk_widths: vec![16, 8],
            head_hidden: vec![8],
            branches: 5,
        }
    }

    fn build(seed: u64) -> (BdqAgent, ControlEnvironment) {
        let net = net3();
        let target = net.parse_assignment("x2=0").unwrap();
        let mut rng = RngStream::new(seed, "init");
        let agent = BdqAgent::new(&net, &target, true, &tiny_arch(), &mut rng);
        let env = ControlEnvironment::new(
            net,
            target,
            registry_all_four(),
            &PasipConfig::default(),
            true,
            5,
        )
        .unwrap();
        (agent, env)
    }

    #[test]
    fn schedule_interpolates_and_clamps() {
        let s = LinearSchedule {
            start: 1.0,
            end: 0.05,
            horizon: 100,
        };
        assert_eq!(s.value(0), 1.0);
        assert!((s.value(50) - 0.525).abs() < 1e-12);
        assert_eq!(s.value(100), 0.05);
        assert_eq!(s.value(10_000), 0.05);
        let flat = LinearSchedule {
            start: 0.4,
            end: 1.0,
            horizon: 0,
        };
        assert_eq!(flat.value(0), 1.0);
    }

    #[test]
    fn zero_budget_leaves_agent_untrained_with_empty_log() {
        let (mut agent, mut env) = build(7);
        let before = agent.net.online.clone();
        let cfg = TrainConfig {
            steps: 0,
            ..TrainConfig::default()
        };
        let mut rng = RngStream::new(7, "train");
        let r = train(&mut agent, &mut env, &cfg, &mut rng).unwrap();
        assert_eq!(r.log, format!("{LOG_HEADER}\n"));
        assert_eq!(r.episodes, 0);
        assert_eq!(agent.net.online, before);
    }

    #[test]
    fn same_seed_gives_identical_logs_and_parameters() {
        let cfg = TrainConfig {
            steps: 120,
            warmup: 16,
            batch: 8,
            replay_capacity: 256,
            eps_horizon: 80,
            ..TrainConfig::default()
        };
        let mut out = Vec::new();
        for _ in 0..2 {
            let (mut agent, mut env) = build(11);
            let mut rng = RngStream::new(11, "train");
            let r = train(&mut agent, &mut env, &cfg, &mut rng).unwrap();
            out.push((r.log, agent.net.online.clone()));
        }
        assert_eq!(out[0].0, out[1].0);
        assert_eq!(out[0].1, out[1].1);
        let (log, _) = &out[0];
        assert_eq!(log.lines().count(), 121);
        assert!(log.starts_with(LOG_HEADER));
    }

    #[test]
    fn different_seed_changes_the_log() {
        let cfg = TrainConfig {
            steps: 60,
            warmup: 16,
            batch: 8,
            replay_capacity: 256,
            ..TrainConfig::default()
        };
        let (mut a1, mut e1) = build(11);
        let mut r1 = RngStream::new(11, "train");
        let (mut a2, mut e2) = build(11);
        let mut r2 = RngStream::new(12, "train");
        let l1 = train(&mut a1, &mut e1, &cfg, &mut r1).unwrap().log;
        let l2 = train(&mut a2, &mut e2, &cfg, &mut r2).unwrap().log;
        assert_ne!(l1, l2);
    }

    #[test]
    fn no_updates_before_warmup() {
        let cfg = TrainConfig {
            steps: 40,
            warmup: 30,
            batch: 8,
            replay_capacity: 256,
            ..TrainConfig::default()
        };
        let (mut agent, mut env) = build(3);
        let mut rng = RngStream::new(3, "train");
        let r = train(&mut agent, &mut env, &cfg, &mut rng).unwrap();
        let mut seen_update = false;
        for line in r.log.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let step: u64 = cols[0].parse().unwrap();
            let loss: f64 = cols[4].parse().unwrap();
            if step < 30 {
                assert_eq!(loss, 0.0, "update before warm-up at step {step}");
            }
            if loss != 0.0 {
                seen_update = true;
            }
        }
        assert!(seen_update, "no gradient update ever ran");
    }

    #[test]
    fn greedy_frequency_matches_epsilon() {
        let (agent, _) = build(5);
        let state = NetworkState::from_u64(3, 0b110);
        let greedy = agent.greedy_action(&state).choices;
        let n_opt = agent.space().n_options() as f64;
        let mut rng = RngStream::new(5, "draws");
        let draws = 30_000;
        let mut hits = vec![0u32; 5];
        for _ in 0..draws {
            let a = agent.select_action(&state, 0.5, &mut rng);
            for (d, (&c, &g)) in a.choices.iter().zip(&greedy).enumerate() {
                if c == g {
                    hits[d] += 1;
                }
            }
        }
        // per branch: P(greedy option) = 0.5 + 0.5/(m+1); 4σ tolerance
        let p = 0.5 + 0.5 / n_opt;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        for (d, &h) in hits.iter().enumerate() {
            let freq = h as f64 / draws as f64;
            assert!(
                (freq - p).abs() < 4.0 * sigma,
                "branch {d}: freq {freq}, expected {p}"
            );
        }
    }

    #[test]
    fn epsilon_one_is_uniform_over_options() {
        let (agent, _) = build(6);
        let state = NetworkState::from_u64(3, 0b111);
        let mut rng = RngStream::new(6, "draws");
        let n_opt = agent.space().n_options();
        let draws = 30_000;
        let mut counts = vec![0u32; n_opt];
        for _ in 0..draws {
            let a = agent.select_action(&state, 1.0, &mut rng);
            counts[a.choices[0]] += 1;
        }
        let expect = draws as f64 / n_opt as f64;
        for (c, &n) in counts.iter().enumerate() {
            assert!(
                (n as f64 - expect).abs() < 5.0 * expect.sqrt(),
                "option {c}: {n} draws"
            );
        }
    }

    #[test]
    fn epsilon_zero_is_deterministic() {
        let (agent, _) = build(8);
        let state = NetworkState::from_u64(3, 0b011);
        let mut rng = RngStream::new(8, "draws");
        let first = agent.select_action(&state, 0.0, &mut rng);
        for _ in 0..20 {
            assert_eq!(agent.select_action(&state, 0.0, &mut rng), first);
        }
        assert_eq!(first, agent.greedy_action(&state));
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let (agent, _) = build(9);
        let net = net3();
        // environment that freezes inputs disagrees with the agent's space
        let target = net.parse_assignment("x2=0").unwrap();
        let mut env = ControlEnvironment::new(
            net,
            target,
            registry_all_four(),
            &PasipConfig::default(),
            false,
            5,
        )
        .unwrap();
        let mut agent = agent;
        let mut rng = RngStream::new(9, "train");
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(&mut agent, &mut env, &cfg, &mut rng),
            Err(AgentError::BadConfig(_))
        ));
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = TrainConfig {
            gamma: 1.5,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            per_beta_start: 0.9,
            per_beta_end: 0.4,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            batch: 0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn checkpoint_shape_mismatch_is_rejected() {
        let net = net3();
        let target = net.parse_assignment("x2=0").unwrap();
        let mut rng = RngStream::new(10, "init");
        let agent = BdqAgent::new(&net, &target, true, &tiny_arch(), &mut rng);
        let frozen = ActionSpace::new(&net, &target, false, 5);
        assert!(matches!(
            BdqAgent::from_network(agent.net, frozen),
            Err(AgentError::CheckpointMismatch(_))
        ));
    }
}
