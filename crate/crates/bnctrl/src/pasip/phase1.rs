//! Offline pseudo-attractor scan: seeded trajectories with burn-in, visit
//! counting, and a large-attractor checkpoint monitor.

use super::registry::{PaRegistry, Provenance};
use super::{PasipConfig, PasipError};
use crate::bn::{BooleanNetwork, NetworkState, PartialAssignment};
use crate::dynamics::async_step_in_place;
use crate::rng::RngStream;
use std::collections::HashMap;

/// Running monitor for one trajectory: counts states in a tumbling window of
/// up to `span` steps. A state whose count reaches `pct`% of `span` is a
/// dominance event and resets the window; a full window without dominance
/// yields its most frequent state (ties toward the smallest state value).
struct CheckpointMonitor {
    counts: HashMap<NetworkState, u64>,
    len: u64,
    span: u64,
    pct: u64,
}

impl CheckpointMonitor {
    fn new(span: u64, pct: u32) -> Self {
        CheckpointMonitor {
            counts: HashMap::new(),
            len: 0,
            span,
            pct: pct as u64,
        }
    }

    /// Feed one state; returns the checkpoint representative and its visit
    /// share when the window elapses without dominance.
    fn feed(&mut self, s: &NetworkState) -> Option<(NetworkState, f64)> {
        self.len += 1;
        let c = self.counts.entry(s.clone()).or_insert(0);
        *c += 1;
        if *c * 100 >= self.pct * self.span {
            self.counts.clear();
            self.len = 0;
            return None;
        }
        if self.len >= self.span {
            let (best, cnt) = self
                .counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(st, &c)| (st.clone(), c))
                .expect("window is non-empty");
            let share = cnt as f64 / self.span as f64;
            self.counts.clear();
            self.len = 0;
            return Some((best, share));
        }
        None
    }
}

/// Run the offline scan: `trajectories` independent walks from uniformly
/// random initial states (inputs pinned per `env`), each with a burn-in
/// period followed by a counting window. States holding at least
/// `dominance_pct`% of the window register; a checkpoint monitor watching
/// every step registers large-attractor representatives. Substream
/// `traj{i}` drives trajectory `i`, so results do not depend on scheduling.
pub fn phase1_scan(
    net: &BooleanNetwork,
    env: &PartialAssignment,
    cfg: &PasipConfig,
    rng: &RngStream,
) -> Result<PaRegistry, PasipError> {
    cfg.validate()?;
    let restricted = net.restrict(env)?;
    let n = restricted.n_nodes();
    let mut registry = PaRegistry::new();
    let mut global_step: u64 = 0;

    for t in 0..cfg.trajectories {
        let mut sub = rng.substream(&format!("traj{t}"));
        let mut s = NetworkState::random(n, &mut sub);
        env.force(&mut s);
        let mut monitor = CheckpointMonitor::new(cfg.scan_checkpoint, cfg.dominance_pct);

        for _ in 0..cfg.burn_in {
            async_step_in_place(&restricted, &mut s, &mut sub);
            global_step += 1;
            if let Some((rep, share)) = monitor.feed(&s) {
                registry.insert(rep, Provenance::ScanCheckpoint, share, global_step);
            }
        }

        let mut counts: HashMap<NetworkState, u64> = HashMap::new();
        for _ in 0..cfg.window {
            async_step_in_place(&restricted, &mut s, &mut sub);
            global_step += 1;
            *counts.entry(s.clone()).or_insert(0) += 1;
            if let Some((rep, share)) = monitor.feed(&s) {
                registry.insert(rep, Provenance::ScanCheckpoint, share, global_step);
            }
        }

        let mut hits: Vec<(NetworkState, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c * 100 >= cfg.dominance_pct as u64 * cfg.window)
            .collect();
        hits.sort_by(|a, b| a.0.cmp(&b.0));
        for (st, c) in hits {
            registry.insert(
                st,
                Provenance::ScanDominant,
                c as f64 / cfg.window as f64,
                global_step,
            );
        }
    }

    Ok(registry)
}
