//! Strategy recovery from a trained agent, the 10-repeat averaging protocol,
//! and comparison against exact oracle distances.

use crate::agent::{AgentError, BdqAgent, ControlEnvironment};
use crate::bn::NetworkState;
use crate::pasip::PasipError;
use crate::rng::RngStream;
use serde_json::json;
use std::collections::HashMap;
use std::fmt::Write as _;

/// One greedy rollout from a source pseudo-attractor state.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOutcome {
    pub source: NetworkState,
    pub success: bool,
    /// Flip sets in application order; empty sets are no-op actions.
    pub strategy: Vec<Vec<usize>>,
    /// Interventions applied, = `strategy.len()`.
    pub length: u32,
    /// PA states reached after each intervention.
    pub visited: Vec<NetworkState>,
}

/// Greedy (ε=0) rollout from `source`, recording each intervention until
/// alignment or the action cap. A simulation-budget abort counts as failure.
pub fn recover_strategy(
    agent: &BdqAgent,
    env: &mut ControlEnvironment,
    source: &NetworkState,
    rng: &mut RngStream,
) -> Result<RecoveryOutcome, AgentError> {
    env.begin_episode_at(source)?;
    let mut outcome = RecoveryOutcome {
        source: source.clone(),
        success: false,
        strategy: Vec::new(),
        length: 0,
        visited: Vec::new(),
    };
    loop {
        let action = agent.greedy_action(env.current());
        let flips = env.space().decode(&action);
        match env.step(&action, rng) {
            Ok(out) => {
                outcome.strategy.push(flips);
                outcome.visited.push(out.next.clone());
                outcome.length += 1;
                if out.done {
                    outcome.success = out.aligned;
                    return Ok(outcome);
                }
            }
            Err(AgentError::Pasip(PasipError::EvolveBudget { .. })) => {
                outcome.strategy.push(flips);
                outcome.length += 1;
                return Ok(outcome);
            }
            Err(e) => return Err(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceStats {
    pub source: NetworkState,
    pub outcomes: Vec<RecoveryOutcome>,
    pub successes: u32,
    /// Mean intervention count over successful repeats; `None` when all fail.
    pub mean_length: Option<f64>,
}

impl SourceStats {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.outcomes.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub per_source: Vec<SourceStats>,
    pub repeats: u32,
    /// Unweighted mean of per-source mean lengths (sources with at least one
    /// success); `None` when every source failed everywhere.
    pub overall_mean: Option<f64>,
    pub success_rate: f64,
}

/// Run `repeats` seeded recoveries per source. Substreams are labeled by
/// (source hex, repeat) so each cell reproduces independently of ordering.
pub fn evaluate(
    agent: &BdqAgent,
    env: &mut ControlEnvironment,
    sources: &[NetworkState],
    repeats: u32,
    rng: &mut RngStream,
) -> Result<EvaluationReport, AgentError> {
    if sources.is_empty() {
        return Err(AgentError::BadConfig("no evaluation sources".to_string()));
    }
    if repeats == 0 {
        return Err(AgentError::BadConfig("repeats must be positive".to_string()));
    }
    let mut per_source = Vec::with_capacity(sources.len());
    for src in sources {
        let mut outcomes = Vec::with_capacity(repeats as usize);
        for rep in 0..repeats {
            let mut cell = rng.substream(&format!("{}#{rep}", src.to_hex()));
            outcomes.push(recover_strategy(agent, env, src, &mut cell)?);
        }
        let successes = outcomes.iter().filter(|o| o.success).count() as u32;
        let mean_length = if successes > 0 {
            let total: u64 = outcomes
                .iter()
                .filter(|o| o.success)
                .map(|o| o.length as u64)
                .sum();
            Some(total as f64 / successes as f64)
        } else {
            None
        };
        per_source.push(SourceStats {
            source: src.clone(),
            outcomes,
            successes,
            mean_length,
        });
    }
    let means: Vec<f64> = per_source.iter().filter_map(|s| s.mean_length).collect();
    let overall_mean = if means.is_empty() {
        None
    } else {
        Some(means.iter().sum::<f64>() / means.len() as f64)
    };
    let total_success: u32 = per_source.iter().map(|s| s.successes).sum();
    let success_rate = total_success as f64 / (sources.len() as u32 * repeats) as f64;
    Ok(EvaluationReport {
        per_source,
        repeats,
        overall_mean,
        success_rate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapEntry {
    pub source: NetworkState,
    pub oracle_min: Option<u64>,
    pub agent_mean: Option<f64>,
    /// agent mean − oracle minimum; `None` without both sides.
    pub gap: Option<f64>,
    /// Gap above one intervention, or total failure where the oracle
    /// certifies reachability.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub entries: Vec<GapEntry>,
    pub max_gap: Option<f64>,
    pub flagged: usize,
}

/// Per-source gap between the agent's mean strategy length and the exact
/// minimum. Sources missing from `oracle` are reported without a gap.
pub fn compare_to_oracle(
    report: &EvaluationReport,
    oracle: &HashMap<NetworkState, u64>,
) -> GapReport {
    let mut entries = Vec::with_capacity(report.per_source.len());
    for s in &report.per_source {
        let oracle_min = oracle.get(&s.source).copied();
        let gap = match (s.mean_length, oracle_min) {
            (Some(m), Some(o)) => Some(m - o as f64),
            _ => None,
        };
        let flagged = match (gap, oracle_min) {
            (Some(g), _) => g > 1.0,
            (None, Some(_)) => s.mean_length.is_none(),
            (None, None) => false,
        };
        entries.push(GapEntry {
            source: s.source.clone(),
            oracle_min,
            agent_mean: s.mean_length,
            gap,
            flagged,
        });
    }
    let max_gap = entries
        .iter()
        .filter_map(|e| e.gap)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g))));
    let flagged = entries.iter().filter(|e| e.flagged).count();
    GapReport {
        entries,
        max_gap,
        flagged,
    }
}

impl EvaluationReport {
    /// Row-per-repeat CSV: `model,condition,source_hex,repeat,success,length`.
    pub fn to_csv(&self, model: &str, condition: &str) -> String {
        let mut out = String::from("model,condition,source_hex,repeat,success,length\n");
        for s in &self.per_source {
            for (rep, o) in s.outcomes.iter().enumerate() {
                writeln!(
                    out,
                    "{model},{condition},{},{rep},{},{}",
                    s.source.to_hex(),
                    o.success as u8,
                    o.length
                )
                .expect("writing to a string cannot fail");
            }
        }
        out
    }

    /// Summary with per-source means, rates, and oracle gaps if available.
    pub fn summary_json(&self, model: &str, condition: &str, gaps: Option<&GapReport>) -> String {
        let sources: Vec<_> = self
            .per_source
            .iter()
            .map(|s| {
                let gap = gaps.and_then(|g| {
                    g.entries
                        .iter()
                        .find(|e| e.source == s.source)
                        .map(|e| json!({"oracle_min": e.oracle_min, "gap": e.gap, "flagged": e.flagged}))
                });
                json!({
                    "source": s.source.to_hex(),
                    "repeats": s.outcomes.len(),
                    "successes": s.successes,
                    "success_rate": s.success_rate(),
                    "mean_length": s.mean_length,
                    "oracle": gap,
                })
            })
            .collect();
        let value = json!({
            "model": model,
            "condition": condition,
            "repeats": self.repeats,
            "overall_mean_length": self.overall_mean,
            "success_rate": self.success_rate,
            "max_oracle_gap": gaps.and_then(|g| g.max_gap),
            "flagged_sources": gaps.map(|g| g.flagged),
            "sources": sources,
        });
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}
