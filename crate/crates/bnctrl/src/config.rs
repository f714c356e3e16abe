//! Flat `key = value` run configuration with `[section]` headers, so every
//! hyperparameter of a run is auditable in one file. Unknown sections or
//! keys are errors; `dump()` prints the canonical form with all defaults.

use crate::agent::TrainConfig;
use crate::bn::{BooleanNetwork, ModelError, PartialAssignment};
use crate::exact::DEFAULT_STATE_CAP;
use crate::pasip::PasipConfig;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSection {
    pub path: String,
    /// Environmental condition, e.g. `x1=0, x5=1`.
    pub env: String,
    /// Target configuration, same syntax.
    pub target: String,
    /// Permit the target to pin nodes the condition also pins.
    pub allow_overlap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub seed: u64,
    pub out: String,
    /// Explicit-analysis state cap.
    pub cap: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            out: String::from("."),
            cap: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSection {
    pub steps: u64,
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
    pub update_every: u64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_horizon: u64,
    pub include_inputs: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            steps: t.steps,
            warmup: t.warmup,
            batch: t.batch,
            replay_capacity: t.replay_capacity,
            per_alpha: t.per_alpha,
            per_beta_start: t.per_beta_start,
            per_beta_end: t.per_beta_end,
            per_floor: t.per_floor,
            gamma: t.gamma,
            lr: t.lr,
            clip: t.clip,
            tau: t.tau,
            update_every: t.update_every,
            eps_start: t.eps_start,
            eps_end: t.eps_end,
            eps_horizon: t.eps_horizon,
            include_inputs: true,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            steps: self.steps,
            warmup: self.warmup,
            batch: self.batch,
            replay_capacity: self.replay_capacity,
            per_alpha: self.per_alpha,
            per_beta_start: self.per_beta_start,
            per_beta_end: self.per_beta_end,
            per_floor: self.per_floor,
            gamma: self.gamma,
            lr: self.lr,
            clip: self.clip,
            tau: self.tau,
            update_every: self.update_every,
            eps_start: self.eps_start,
            eps_end: self.eps_end,
            eps_horizon: self.eps_horizon,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSection {
    pub max_flips: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { max_flips: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateSection {
    pub repeats: u32,
    pub checkpoint: String,
    pub registry: String,
    /// Compute exact oracle gaps when the model fits under the cap.
    pub with_oracle: bool,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            repeats: 10,
            checkpoint: String::new(),
            registry: String::new(),
            with_oracle: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub run: RunSection,
    pub pasip: PasipConfig,
    pub train: TrainSection,
    pub oracle: OracleSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown section '[{name}]'")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key '{key}' in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: bad value for '{key}': {value}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("key '{key}' appears before any [section] header")]
    NoSection { key: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("target and condition both pin {nodes:?}; set allow_overlap = true to permit")]
    Overlap { nodes: Vec<String> },
}

macro_rules! parse_val {
    ($slot:expr, $line:expr, $key:expr, $value:expr) => {
        $slot = $value.parse().map_err(|_| ConfigError::BadValue {
            line: $line,
            key: $key.to_string(),
            value: $value.to_string(),
        })?
    };
}

impl RunConfig {
    /// Overlay `text` on the defaults. Comments start with `#`.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.split_once('#') {
                Some((before, _)) => before.trim(),
                None => raw.trim(),
            };
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                })?;
                let name = name.trim();
                if !matches!(
                    name,
                    "model" | "run" | "pasip" | "train" | "oracle" | "evaluate"
                ) {
                    return Err(ConfigError::UnknownSection {
                        line,
                        name: name.to_string(),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: content.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.as_deref().ok_or_else(|| ConfigError::NoSection {
                key: key.to_string(),
            })?;
            cfg.set(section, key, value, line)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        match (section, key) {
            ("model", "path") => self.model.path = value.to_string(),
            ("model", "env") => self.model.env = value.to_string(),
            ("model", "target") => self.model.target = value.to_string(),
            ("model", "allow_overlap") => parse_val!(self.model.allow_overlap, line, key, value),
            ("run", "seed") => parse_val!(self.run.seed, line, key, value),
            ("run", "out") => self.run.out = value.to_string(),
            ("run", "cap") => parse_val!(self.run.cap, line, key, value),
            ("pasip", "trajectories") => parse_val!(self.pasip.trajectories, line, key, value),
            ("pasip", "burn_in") => parse_val!(self.pasip.burn_in, line, key, value),
            ("pasip", "window") => parse_val!(self.pasip.window, line, key, value),
            ("pasip", "dominance_pct") => parse_val!(self.pasip.dominance_pct, line, key, value),
            ("pasip", "scan_checkpoint") => parse_val!(self.pasip.scan_checkpoint, line, key, value),
            ("pasip", "dwell") => parse_val!(self.pasip.dwell, line, key, value),
            ("pasip", "history") => parse_val!(self.pasip.history, line, key, value),
            ("pasip", "revisit_pct") => parse_val!(self.pasip.revisit_pct, line, key, value),
            ("pasip", "stream_checkpoint") => {
                parse_val!(self.pasip.stream_checkpoint, line, key, value)
            }
            ("pasip", "evolve_budget") => parse_val!(self.pasip.evolve_budget, line, key, value),
            ("train", "steps") => parse_val!(self.train.steps, line, key, value),
            ("train", "warmup") => parse_val!(self.train.warmup, line, key, value),
            ("train", "batch") => parse_val!(self.train.batch, line, key, value),
            ("train", "replay_capacity") => {
                parse_val!(self.train.replay_capacity, line, key, value)
            }
            ("train", "per_alpha") => parse_val!(self.train.per_alpha, line, key, value),
            ("train", "per_beta_start") => parse_val!(self.train.per_beta_start, line, key, value),
            ("train", "per_beta_end") => parse_val!(self.train.per_beta_end, line, key, value),
            ("train", "per_floor") => parse_val!(self.train.per_floor, line, key, value),
            ("train", "gamma") => parse_val!(self.train.gamma, line, key, value),
            ("train", "lr") => parse_val!(self.train.lr, line, key, value),
            ("train", "clip") => parse_val!(self.train.clip, line, key, value),
            ("train", "tau") => parse_val!(self.train.tau, line, key, value),
            ("train", "update_every") => parse_val!(self.train.update_every, line, key, value),
            ("train", "eps_start") => parse_val!(self.train.eps_start, line, key, value),
            ("train", "eps_end") => parse_val!(self.train.eps_end, line, key, value),
            ("train", "eps_horizon") => parse_val!(self.train.eps_horizon, line, key, value),
            ("train", "include_inputs") => parse_val!(self.train.include_inputs, line, key, value),
            ("oracle", "max_flips") => parse_val!(self.oracle.max_flips, line, key, value),
            ("evaluate", "repeats") => parse_val!(self.evaluate.repeats, line, key, value),
            ("evaluate", "checkpoint") => self.evaluate.checkpoint = value.to_string(),
            ("evaluate", "registry") => self.evaluate.registry = value.to_string(),
            ("evaluate", "with_oracle") => parse_val!(self.evaluate.with_oracle, line, key, value),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    section: section.to_string(),
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Canonical text: every key in declaration order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        writeln!(w, "[model]").unwrap();
        writeln!(w, "path = {}", self.model.path).unwrap();
        writeln!(w, "env = {}", self.model.env).unwrap();
        writeln!(w, "target = {}", self.model.target).unwrap();
        writeln!(w, "allow_overlap = {}", self.model.allow_overlap).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[run]").unwrap();
        writeln!(w, "seed = {}", self.run.seed).unwrap();
        writeln!(w, "out = {}", self.run.out).unwrap();
        writeln!(w, "cap = {}", self.run.cap).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[pasip]").unwrap();
        writeln!(w, "trajectories = {}", self.pasip.trajectories).unwrap();
        writeln!(w, "burn_in = {}", self.pasip.burn_in).unwrap();
        writeln!(w, "window = {}", self.pasip.window).unwrap();
        writeln!(w, "dominance_pct = {}", self.pasip.dominance_pct).unwrap();
        writeln!(w, "scan_checkpoint = {}", self.pasip.scan_checkpoint).unwrap();
        writeln!(w, "dwell = {}", self.pasip.dwell).unwrap();
        writeln!(w, "history = {}", self.pasip.history).unwrap();
        writeln!(w, "revisit_pct = {}", self.pasip.revisit_pct).unwrap();
        writeln!(w, "stream_checkpoint = {}", self.pasip.stream_checkpoint).unwrap();
        writeln!(w, "evolve_budget = {}", self.pasip.evolve_budget).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[train]").unwrap();
        writeln!(w, "steps = {}", self.train.steps).unwrap();
        writeln!(w, "warmup = {}", self.train.warmup).unwrap();
        writeln!(w, "batch = {}", self.train.batch).unwrap();
        writeln!(w, "replay_capacity = {}", self.train.replay_capacity).unwrap();
        writeln!(w, "per_alpha = {}", self.train.per_alpha).unwrap();
        writeln!(w, "per_beta_start = {}", self.train.per_beta_start).unwrap();
        writeln!(w, "per_beta_end = {}", self.train.per_beta_end).unwrap();
        writeln!(w, "per_floor = {}", self.train.per_floor).unwrap();
        writeln!(w, "gamma = {}", self.train.gamma).unwrap();
        writeln!(w, "lr = {}", self.train.lr).unwrap();
        writeln!(w, "clip = {}", self.train.clip).unwrap();
        writeln!(w, "tau = {}", self.train.tau).unwrap();
        writeln!(w, "update_every = {}", self.train.update_every).unwrap();
        writeln!(w, "eps_start = {}", self.train.eps_start).unwrap();
        writeln!(w, "eps_end = {}", self.train.eps_end).unwrap();
        writeln!(w, "eps_horizon = {}", self.train.eps_horizon).unwrap();
        writeln!(w, "include_inputs = {}", self.train.include_inputs).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[oracle]").unwrap();
        writeln!(w, "max_flips = {}", self.oracle.max_flips).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[evaluate]").unwrap();
        writeln!(w, "repeats = {}", self.evaluate.repeats).unwrap();
        writeln!(w, "checkpoint = {}", self.evaluate.checkpoint).unwrap();
        writeln!(w, "registry = {}", self.evaluate.registry).unwrap();
        writeln!(w, "with_oracle = {}", self.evaluate.with_oracle).unwrap();
        s
    }

    /// Parse the condition and target against `net`, checking that every
    /// referenced node exists and that the two pin disjoint nodes unless
    /// overlap is explicitly allowed.
    pub fn resolve_assignments(
        &self,
        net: &BooleanNetwork,
    ) -> Result<(PartialAssignment, PartialAssignment), ConfigError> {
        let env = net.parse_assignment(&self.model.env)?;
        let target = net.parse_assignment(&self.model.target)?;
        if !self.model.allow_overlap {
            let shared: Vec<String> = env
                .iter()
                .filter(|(node, _)| target.pin_of(*node).is_some())
                .map(|(node, _)| net.name(node).to_string())
                .collect();
            if !shared.is_empty() {
                return Err(ConfigError::Overlap { nodes: shared });
            }
        }
        Ok((env, target))
    }
}
