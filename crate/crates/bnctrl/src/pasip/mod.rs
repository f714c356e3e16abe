//! Pseudo-attractor state identification.
//!
//! Long-run simulation of an asynchronous Boolean network concentrates on
//! its attractors, but enumerating attractors exactly is infeasible beyond
//! a few dozen nodes. This module identifies *pseudo-attractor* states
//! instead: states whose stationary visit probability within an attractor
//! is at least `1/m` for an attractor of `m` states. Every attractor holds
//! at least one such state, and the number of states above a `k`% visit
//! threshold is tightly bounded (see [`pa_size_bound`]), so a registry of
//! pseudo-attractor states is a compact, discoverable proxy for the full
//! attractor landscape.
//!
//! Identification runs in two phases. [`phase1_scan`] performs an offline
//! scan from random initial states; [`OnlineDetector`] then watches any
//! further simulation (e.g. during agent training) and extends the registry
//! when trajectories settle somewhere new. Both phases may register
//! transient states in rare cases; spurious entries are never removed, as
//! extra registry entries only add candidate goals and do not break
//! downstream consumers.

mod detector;
mod phase1;
mod registry;

pub use detector::{Observation, OnlineDetector};
pub use phase1::phase1_scan;
pub use registry::{PaRecord, PaRegistry, Provenance, RegistryError};

use crate::bn::{BooleanNetwork, ModelError, NetworkState};
use crate::dynamics::async_step_in_place;
use crate::exact::{Attractor, ExactError, ExplicitStg};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Tuning knobs for both identification phases.
///
/// Defaults follow the reference procedure: 100 scan trajectories of 200
/// burn-in plus 1000 counted steps each with a 5% registration bar, online
/// settling after 1000 repeated states, a 10000-step revisit history with a
/// 15% bar, and checkpoint spans of one million steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PasipConfig {
    /// Number of independent scan trajectories (k).
    pub trajectories: u32,
    /// Steps discarded at the start of each scan trajectory (n0).
    pub burn_in: u64,
    /// Counted steps per scan trajectory (n1).
    pub window: u64,
    /// Registration bar for the scan window, in percent (k1).
    pub dominance_pct: u32,
    /// Steps without a dominating state before the scan registers the most
    /// frequent one anyway (d1).
    pub scan_checkpoint: u64,
    /// Consecutive repeats of one state before the online detector checks
    /// it for being a fixed point (n2).
    pub dwell: u64,
    /// Online revisit history span in steps (n3).
    pub history: u64,
    /// Online registration bar for the history window, in percent (k2).
    pub revisit_pct: u32,
    /// Online steps without reaching a known or new pseudo-attractor state
    /// before the most frequent recent state registers (d2).
    pub stream_checkpoint: u64,
    /// Step budget for [`evolve_to_pa`] before giving up.
    pub evolve_budget: u64,
}

impl Default for PasipConfig {
    fn default() -> Self {
        PasipConfig {
            trajectories: 100,
            burn_in: 200,
            window: 1000,
            dominance_pct: 5,
            scan_checkpoint: 1_000_000,
            dwell: 1000,
            history: 10_000,
            revisit_pct: 15,
            stream_checkpoint: 1_000_000,
            evolve_budget: 2_000_000,
        }
    }
}

impl PasipConfig {
    pub fn validate(&self) -> Result<(), PasipError> {
        fn bar(name: &str, v: u64) -> Result<(), PasipError> {
            if v == 0 {
                Err(PasipError::BadConfig(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        }
        bar("trajectories", self.trajectories as u64)?;
        bar("window", self.window)?;
        bar("scan_checkpoint", self.scan_checkpoint)?;
        bar("dwell", self.dwell)?;
        bar("history", self.history)?;
        bar("stream_checkpoint", self.stream_checkpoint)?;
        bar("evolve_budget", self.evolve_budget)?;
        for (name, pct) in [
            ("dominance_pct", self.dominance_pct),
            ("revisit_pct", self.revisit_pct),
        ] {
            if pct == 0 || pct > 100 {
                return Err(PasipError::BadConfig(format!(
                    "{name} must be in 1..=100, got {pct}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PasipError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no pseudo-attractor state reached within {budget} steps")]
    EvolveBudget { budget: u64 },
}

/// Upper bound on the number of states in one attractor whose stationary
/// probability is at least `k_percent`%. With `q = floor(100/k)`: at most
/// `q` states fit, and when `k` divides 100 exactly, hitting `q` states
/// forces every one of them to sit exactly at the bar, which positive
/// recurrence rules out unless the attractor has no other states. So the
/// bound drops to `q - 1` when the attractor is larger than `q` (or its
/// size is unknown).
pub fn pa_size_bound(k_percent: u32, attractor_size: Option<u64>) -> u64 {
    assert!(
        (1..=100).contains(&k_percent),
        "threshold must be a percentage in 1..=100"
    );
    let k = k_percent as u64;
    let q = 100 / k;
    if 100 % k == 0 && attractor_size.is_none_or(|m| m > q) {
        q - 1
    } else {
        q
    }
}

/// Simulate from `s0` until a pseudo-attractor state is reached, feeding
/// every visited state to the online detector. Returns the pseudo-attractor
/// state and the number of steps taken.
///
/// If `s0` is already registered it is returned immediately. When the
/// detector registers new states mid-walk, the walk ends there: the current
/// state is returned if it is among them, otherwise the first (smallest)
/// newly registered state stands in for the neighbourhood the trajectory
/// was circling.
pub fn evolve_to_pa(
    net: &BooleanNetwork,
    s0: &NetworkState,
    registry: &mut PaRegistry,
    detector: &mut OnlineDetector,
    rng: &mut RngStream,
    budget: u64,
) -> Result<(NetworkState, u64), PasipError> {
    if registry.contains(s0) {
        return Ok((s0.clone(), 0));
    }
    let mut s = s0.clone();
    for step in 1..=budget {
        async_step_in_place(net, &mut s, rng);
        match detector.observe(&s, registry, net) {
            Observation::Quiet => {}
            Observation::KnownPa => return Ok((s, step)),
            Observation::Registered(new_states) => {
                if new_states.iter().any(|st| *st == s) {
                    return Ok((s, step));
                }
                return Ok((new_states[0].clone(), step));
            }
        }
    }
    Err(PasipError::EvolveBudget { budget })
}

/// Build a registry from exact analysis: every state of every attractor
/// whose stationary probability meets the pseudo-attractor bar `1/m`.
/// Useful as ground truth when the state space is small enough.
pub fn exact_registry(
    stg: &ExplicitStg,
    attractors: &[Attractor],
) -> Result<PaRegistry, ExactError> {
    let mut reg = PaRegistry::new();
    for a in attractors {
        let dist = crate::exact::stationary_distribution(stg, a)?;
        for idx in crate::exact::pseudo_attractor_exact(&dist) {
            let p = dist.prob_of(idx).expect("threshold state is in support");
            reg.insert(stg.unpack(idx), Provenance::Exact, p, 0);
        }
    }
    Ok(reg)
}
