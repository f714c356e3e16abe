//! Boolean network model: named nodes, predictor functions, pruned parent
//! sets, input detection, restriction under environmental pins.

use super::expr::BoolExpr;
use super::state::{NetworkState, PartialAssignment};
use crate::rng::fnv1a64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Hard cap on node count; covers every published model we target with room
/// to spare while keeping bit-vector strides small.
pub const MAX_NODES: usize = 512;

/// Syntactic variable count above which essential-variable detection switches
/// from exhaustive truth tables to randomized witness search.
const EXACT_ESSENTIAL_LIMIT: usize = 20;

/// Witness trials per variable in the randomized fallback.
const ESSENTIAL_SAMPLES: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("network has no nodes")]
    Empty,
    #[error("network has {n} nodes, maximum supported is {max}", max = MAX_NODES)]
    TooManyNodes { n: usize },
    #[error("duplicate node name '{name}'")]
    DuplicateName { name: String },
    #[error("invalid node name '{name}'")]
    BadName { name: String },
    #[error("predictor count {predictors} does not match node count {nodes}")]
    CountMismatch { nodes: usize, predictors: usize },
    #[error("predictor of '{node}' references undeclared variable index {index}")]
    BadVarIndex { node: String, index: usize },
    #[error("cannot pin '{name}': not an input node")]
    PinNotInput { name: String },
    #[error("unknown node '{name}'")]
    UnknownNode { name: String },
    #[error("bad assignment fragment '{text}', expected name=0 or name=1")]
    AssignmentSyntax { text: String },
    #[error("node '{name}' is pinned to conflicting values")]
    ConflictingPin { name: String },
}

/// An immutable Boolean network: node names, predictor expressions, parent
/// sets pruned to essential variables, and the cached input-node set.
#[derive(Debug, Clone)]
pub struct BooleanNetwork {
    names: Vec<String>,
    predictors: Vec<BoolExpr>,
    parents: Vec<Vec<usize>>,
    input: Vec<bool>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Essential variables of `expr`: those whose flip changes the output under
/// some assignment. Exhaustive over the syntactic variables when there are at
/// most 20 of them, otherwise randomized witness search with a fixed internal
/// seed (a found witness is exact proof; absence after 4096 trials drops the
/// variable).
pub fn essential_inputs(expr: &BoolExpr, n: usize) -> Vec<usize> {
    let mut syn = BTreeSet::new();
    expr.collect_vars(&mut syn);
    let vars: Vec<usize> = syn.into_iter().collect();
    debug_assert!(vars.iter().all(|&v| v < n));
    let k = vars.len();
    if k == 0 {
        return Vec::new();
    }

    // Position of each variable in `vars`, for closure-based evaluation.
    let pos = |v: usize| vars.iter().position(|&u| u == v).unwrap();

    if k <= EXACT_ESSENTIAL_LIMIT {
        let size = 1usize << k;
        let mut table = vec![false; size];
        for (a, slot) in table.iter_mut().enumerate() {
            *slot = expr.eval_with(&mut |v| (a >> pos(v)) & 1 == 1);
        }
        let mut out = Vec::new();
        for (j, &v) in vars.iter().enumerate() {
            let bit = 1usize << j;
            let differs = (0..size)
                .filter(|a| a & bit == 0)
                .any(|a| table[a] != table[a | bit]);
            if differs {
                out.push(v);
            }
        }
        return out;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x65737365_6e746c00);
    let mut out = Vec::new();
    let words = k.div_ceil(64);
    let mut assign = vec![0u64; words];
    for (j, &v) in vars.iter().enumerate() {
        let mut essential = false;
        for _ in 0..ESSENTIAL_SAMPLES {
            for w in assign.iter_mut() {
                *w = rng.random();
            }
            let base = expr.eval_with(&mut |u| {
                let p = pos(u);
                (assign[p / 64] >> (p % 64)) & 1 == 1
            });
            let flipped = expr.eval_with(&mut |u| {
                let p = pos(u);
                let b = (assign[p / 64] >> (p % 64)) & 1 == 1;
                if p == j {
                    !b
                } else {
                    b
                }
            });
            if base != flipped {
                essential = true;
                break;
            }
        }
        if essential {
            out.push(v);
        }
    }
    out
}

impl BooleanNetwork {
    /// Build a network from parallel name / predictor lists, validating and
    /// pruning parent sets to essential variables.
    pub fn from_parts(names: Vec<String>, predictors: Vec<BoolExpr>) -> Result<Self, ModelError> {
        if names.is_empty() {
            return Err(ModelError::Empty);
        }
        if names.len() > MAX_NODES {
            return Err(ModelError::TooManyNodes { n: names.len() });
        }
        if names.len() != predictors.len() {
            return Err(ModelError::CountMismatch {
                nodes: names.len(),
                predictors: predictors.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !valid_name(name) {
                return Err(ModelError::BadName { name: name.clone() });
            }
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateName { name: name.clone() });
            }
        }
        let n = names.len();
        for (i, p) in predictors.iter().enumerate() {
            let mut vars = BTreeSet::new();
            p.collect_vars(&mut vars);
            if let Some(&bad) = vars.iter().find(|&&v| v >= n) {
                return Err(ModelError::BadVarIndex {
                    node: names[i].clone(),
                    index: bad,
                });
            }
        }

        let parents: Vec<Vec<usize>> = predictors
            .iter()
            .map(|p| essential_inputs(p, n))
            .collect();
        let input: Vec<bool> = predictors
            .iter()
            .enumerate()
            .map(|(i, p)| {
                parents[i] == [i]
                    && !p.eval_with(&mut |_| false)
                    && p.eval_with(&mut |_| true)
            })
            .collect();

        Ok(BooleanNetwork {
            names,
            predictors,
            parents,
            input,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn predictor(&self, v: usize) -> &BoolExpr {
        &self.predictors[v]
    }

    /// Essential parents of node `v`, ascending.
    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    /// A node is an input iff its pruned predictor is its own identity.
    pub fn is_input(&self, v: usize) -> bool {
        self.input[v]
    }

    /// Indices of all input nodes, ascending.
    pub fn inputs(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&v| self.input[v]).collect()
    }

    /// Value of node `v`'s predictor at `state`.
    pub fn eval_node(&self, v: usize, state: &NetworkState) -> bool {
        self.predictors[v].eval(state)
    }

    /// Structure-graph edges (parent, child), one per parent relation,
    /// sorted by child then parent.
    pub fn structure_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (child, pa) in self.parents.iter().enumerate() {
            for &parent in pa {
                edges.push((parent, child));
            }
        }
        edges.sort_by_key(|&(u, v)| (v, u));
        edges
    }

    /// Restrict the network under an environmental condition: every pinned
    /// node must be an input; its predictor becomes the pinned constant and
    /// all reads of it are substituted away. Parent sets are recomputed.
    pub fn restrict(&self, env: &PartialAssignment) -> Result<BooleanNetwork, ModelError> {
        for (v, _) in env.iter() {
            if v >= self.n_nodes() {
                return Err(ModelError::BadVarIndex {
                    node: format!("pin #{v}"),
                    index: v,
                });
            }
            if !self.input[v] {
                return Err(ModelError::PinNotInput {
                    name: self.names[v].clone(),
                });
            }
        }
        if env.is_empty() {
            return Ok(self.clone());
        }
        let predictors: Vec<BoolExpr> = self
            .predictors
            .iter()
            .enumerate()
            .map(|(v, p)| match env.pin_of(v) {
                Some(bit) => BoolExpr::Const(bit),
                None => p.substitute(env),
            })
            .collect();
        BooleanNetwork::from_parts(self.names.clone(), predictors)
    }

    /// Canonical BoolNet text: header plus one `name, factor` line per node in
    /// index order. Re-parsing yields a network with identical truth tables.
    pub fn serialize_bnet(&self) -> String {
        let mut out = String::from("targets, factors\n");
        for (v, p) in self.predictors.iter().enumerate() {
            out.push_str(&self.names[v]);
            out.push_str(", ");
            out.push_str(&p.display(&self.names).to_string());
            out.push('\n');
        }
        out
    }

    /// Stable 64-bit digest of the canonical serialization. Used to tie
    /// checkpoints and registries back to the model they were built from.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(self.serialize_bnet().as_bytes())
    }

    /// Parse `name=bit` fragments separated by commas, e.g. `x1=0,x7=1`.
    /// Whitespace around fragments is ignored; an empty string pins nothing.
    pub fn parse_assignment(&self, text: &str) -> Result<PartialAssignment, ModelError> {
        let mut pairs = Vec::new();
        for frag in text.split(',') {
            let frag = frag.trim();
            if frag.is_empty() {
                continue;
            }
            let (name, value) = frag.split_once('=').ok_or_else(|| {
                ModelError::AssignmentSyntax {
                    text: frag.to_string(),
                }
            })?;
            let name = name.trim();
            let bit = match value.trim() {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(ModelError::AssignmentSyntax {
                        text: frag.to_string(),
                    })
                }
            };
            let v = self
                .node_index(name)
                .ok_or_else(|| ModelError::UnknownNode {
                    name: name.to_string(),
                })?;
            pairs.push((v, bit));
        }
        PartialAssignment::from_pairs(pairs).map_err(|c| ModelError::ConflictingPin {
            name: self.names[c.node].clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::parse::parse_bnet;

    fn appendix() -> BooleanNetwork {
        parse_bnet("targets, factors\nx1, x1\nx2, x1 | x3\nx3, x2 & x3\n").unwrap()
    }

    #[test]
    fn parent_sets_are_essential() {
        let net = appendix();
        assert_eq!(net.parents(0), &[0]);
        assert_eq!(net.parents(1), &[0, 2]);
        assert_eq!(net.parents(2), &[1, 2]);
    }

    #[test]
    fn contradiction_prunes_to_constant() {
        let net = parse_bnet("targets, factors\na, a & !a\n").unwrap();
        assert!(net.parents(0).is_empty());
        assert!(!net.is_input(0));
        let s = NetworkState::from_u64(1, 1);
        assert!(!net.eval_node(0, &s));
    }

    #[test]
    fn redundant_variable_pruned() {
        let net = parse_bnet("targets, factors\na, (b & c) | (b & !c)\n").unwrap();
        let b = net.node_index("b").unwrap();
        assert_eq!(net.parents(0), &[b]);
    }

    #[test]
    fn structure_edges_sorted_by_child() {
        let net = appendix();
        assert_eq!(
            net.structure_edges(),
            vec![(0, 0), (0, 1), (2, 1), (1, 2), (2, 2)]
        );
    }

    #[test]
    fn negation_is_not_an_input() {
        let net = parse_bnet("targets, factors\na, !a\n").unwrap();
        assert_eq!(net.parents(0), &[0]);
        assert!(!net.is_input(0));
    }

    #[test]
    fn restrict_pins_input_and_reprunes() {
        let net = appendix();
        let env = net.parse_assignment("x1=0").unwrap();
        let r = net.restrict(&env).unwrap();
        assert_eq!(r.predictor(0), &BoolExpr::Const(false));
        assert_eq!(r.parents(1), &[2]);
        assert_eq!(r.parents(2), &[1, 2]);
        assert!(!r.is_input(0));
    }

    #[test]
    fn restrict_rejects_non_input() {
        let net = appendix();
        let env = net.parse_assignment("x2=1").unwrap();
        assert!(matches!(
            net.restrict(&env),
            Err(ModelError::PinNotInput { .. })
        ));
    }

    #[test]
    fn restrict_empty_is_identity() {
        let net = appendix();
        let r = net.restrict(&PartialAssignment::empty()).unwrap();
        assert_eq!(r.serialize_bnet(), net.serialize_bnet());
    }

    #[test]
    fn serialize_parse_roundtrip_preserves_truth_tables() {
        let net = appendix();
        let again = parse_bnet(&net.serialize_bnet()).unwrap();
        assert_eq!(again.n_nodes(), net.n_nodes());
        for a in 0..8u64 {
            let s = NetworkState::from_u64(3, a);
            for v in 0..3 {
                assert_eq!(net.eval_node(v, &s), again.eval_node(v, &s));
            }
        }
    }

    #[test]
    fn parse_assignment_parses_and_validates() {
        let net = appendix();
        let pa = net.parse_assignment(" x1=0 , x3=1 ").unwrap();
        assert_eq!(pa.pin_of(0), Some(false));
        assert_eq!(pa.pin_of(2), Some(true));
        assert!(net.parse_assignment("").unwrap().is_empty());
        assert!(matches!(
            net.parse_assignment("zz=1"),
            Err(ModelError::UnknownNode { .. })
        ));
        assert!(matches!(
            net.parse_assignment("x1=2"),
            Err(ModelError::AssignmentSyntax { .. })
        ));
        assert!(matches!(
            net.parse_assignment("x1=0,x1=1"),
            Err(ModelError::ConflictingPin { .. })
        ));
    }

    #[test]
    fn fingerprint_tracks_model_content() {
        let a = appendix();
        let b = parse_bnet("targets, factors\nx1, x1\nx2, x1 | x3\nx3, x2 & x3\n").unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = parse_bnet("targets, factors\nx1, x1\nx2, x1 & x3\nx3, x2 & x3\n").unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn from_parts_validates() {
        assert!(matches!(
            BooleanNetwork::from_parts(vec![], vec![]),
            Err(ModelError::Empty)
        ));
        assert!(matches!(
            BooleanNetwork::from_parts(
                vec!["a".into(), "a".into()],
                vec![BoolExpr::Const(true), BoolExpr::Const(true)]
            ),
            Err(ModelError::DuplicateName { .. })
        ));
        assert!(matches!(
            BooleanNetwork::from_parts(vec!["a".into()], vec![BoolExpr::Var(3)]),
            Err(ModelError::BadVarIndex { index: 3, .. })
        ));
        assert!(matches!(
            BooleanNetwork::from_parts(vec!["2x".into()], vec![BoolExpr::Const(true)]),
            Err(ModelError::BadName { .. })
        ));
    }
}
