//! Reference average control path length over environmental conditions.

use std::collections::BTreeMap;

/// One environmental condition's control-length table. Labels name source
/// and target attractors; `cpl` maps (source, target) to the shortest
/// control path length under this condition. Missing entries mean the pair
/// is not controllable.
#[derive(Debug, Clone, Default)]
pub struct AcplCondition {
    pub name: String,
    pub sources: Vec<String>,
    pub targets: Vec<String>,
    pub cpl: BTreeMap<(String, String), u32>,
}

#[derive(Debug, Clone, Default)]
pub struct AcplInputs {
    pub conditions: Vec<AcplCondition>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AcplError {
    #[error("no conditions given")]
    NoConditions,
    #[error("no condition has a target attractor")]
    NoTargetsAnywhere,
    #[error("no condition has a source attractor")]
    NoSources,
    #[error("condition {condition}: '{label}' is both source and target")]
    SourceIsTarget { condition: usize, label: String },
    #[error("condition {condition}: source '{label}' cannot reach any target")]
    Unreachable { condition: usize, label: String },
}

/// Average control path length: per condition, the mean over its sources of
/// the shortest length to an in-condition target, or, when the condition has
/// no targets at all, 1 (for the condition switch) plus the best length from
/// that source under any other condition; then the unweighted mean over
/// conditions that have sources.
pub fn acpl_reference(inputs: &AcplInputs) -> Result<f64, AcplError> {
    let conds = &inputs.conditions;
    if conds.is_empty() {
        return Err(AcplError::NoConditions);
    }
    if conds.iter().all(|c| c.targets.is_empty()) {
        return Err(AcplError::NoTargetsAnywhere);
    }
    for (ci, c) in conds.iter().enumerate() {
        if let Some(label) = c.sources.iter().find(|s| c.targets.contains(s)) {
            return Err(AcplError::SourceIsTarget {
                condition: ci,
                label: label.clone(),
            });
        }
    }

    let best_in = |c: &AcplCondition, source: &str| -> Option<u32> {
        c.targets
            .iter()
            .filter_map(|t| c.cpl.get(&(source.to_string(), t.clone())).copied())
            .min()
    };

    let mut cond_means = Vec::new();
    for (ci, c) in conds.iter().enumerate() {
        if c.sources.is_empty() {
            continue;
        }
        let mut total = 0.0f64;
        for s in &c.sources {
            let v = if !c.targets.is_empty() {
                best_in(c, s)
            } else {
                conds
                    .iter()
                    .enumerate()
                    .filter(|&(cj, other)| cj != ci && !other.targets.is_empty())
                    .filter_map(|(_, other)| best_in(other, s))
                    .min()
                    .map(|l| l + 1)
            };
            match v {
                Some(l) => total += l as f64,
                None => {
                    return Err(AcplError::Unreachable {
                        condition: ci,
                        label: s.clone(),
                    })
                }
            }
        }
        cond_means.push(total / c.sources.len() as f64);
    }
    if cond_means.is_empty() {
        return Err(AcplError::NoSources);
    }
    Ok(cond_means.iter().sum::<f64>() / cond_means.len() as f64)
}
