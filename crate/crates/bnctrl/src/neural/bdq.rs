//! Branching dueling Q-network over a Boolean network's wiring.
//!
//! State bits pass through a stack of graph convolutions, a shared trunk,
//! and then one state-value head plus D branch heads. Branch d's action
//! values are assembled by the dueling rule
//! Q_d(s,a) = V(s) + A_d(s,a) − mean_a' A_d(s,a'), which pins the mean of
//! each branch's advantages and keeps V identifiable.
//!
//! Batches in a control task repeat the same few registry states many
//! times, so both the target computation and the loss first collapse the
//! batch to unique state rows, run the network once per unique row, and
//! scatter the per-item quantities back. This is exact, not an
//! approximation: identical rows produce identical activations.

use super::dense::{init_mlp, mlp_backward, mlp_forward, MlpCache, MlpSpec, ParamAlloc};
use super::graphconv::{graph_conv_backward, graph_conv_forward, GraphConvCache, GraphConvSpec};
use super::tensor::Tensor;
use super::NeuralError;
use crate::rng::RngStream;
use std::collections::HashMap;

/// Layer widths. The default follows the reference design: three
/// convolutions of width 64 with 64-unit kernels, a 1024/512/256 trunk, and
/// 512/512 heads for five action branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BdqArch {
    pub conv_widths: Vec<usize>,
    pub kernel_hidden: usize,
    pub trunk_widths: Vec<usize>,
    pub head_hidden: Vec<usize>,
    pub branches: usize,
}

impl Default for BdqArch {
    fn default() -> Self {
        BdqArch {
            conv_widths: vec![64, 64, 64],
            kernel_hidden: 64,
            trunk_widths: vec![1024, 512, 256],
            head_hidden: vec![512, 512],
            branches: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BdqNetwork {
    n_nodes: usize,
    n_actions: usize,
    arch: BdqArch,
    edges: Vec<(usize, usize)>,
    convs: Vec<GraphConvSpec>,
    trunk: MlpSpec,
    value: MlpSpec,
    branch_heads: Vec<MlpSpec>,
    n_params: usize,
    pub online: Vec<f64>,
    pub target: Vec<f64>,
}

impl BdqNetwork {
    /// Build and initialize a network for a graph with `n_nodes` nodes and
    /// the given (parent, child) edges; each of the `arch.branches` branches
    /// chooses among `n_actions` options.
    pub fn new(
        n_nodes: usize,
        edges: Vec<(usize, usize)>,
        n_actions: usize,
        arch: &BdqArch,
        rng: &mut RngStream,
    ) -> Self {
        assert!(n_nodes > 0 && n_actions > 0 && arch.branches > 0);
        assert!(!arch.conv_widths.is_empty() && !arch.trunk_widths.is_empty());
        let mut alloc = ParamAlloc::new();
        let mut convs = Vec::with_capacity(arch.conv_widths.len());
        let mut f = 1;
        for &w in &arch.conv_widths {
            convs.push(GraphConvSpec::build(&mut alloc, f, arch.kernel_hidden, w));
            f = w;
        }
        let trunk_in = n_nodes * f;
        let (hidden, out) = arch.trunk_widths.split_at(arch.trunk_widths.len() - 1);
        let trunk = MlpSpec::build(&mut alloc, trunk_in, hidden, out[0], true);
        let value = MlpSpec::build(&mut alloc, trunk.n_out(), &arch.head_hidden, 1, false);
        let branch_heads: Vec<MlpSpec> = (0..arch.branches)
            .map(|_| MlpSpec::build(&mut alloc, trunk.n_out(), &arch.head_hidden, n_actions, false))
            .collect();
        let n_params = alloc.total();
        let mut online = vec![0.0; n_params];
        for c in &convs {
            init_mlp(&c.kernel, &mut online, rng);
        }
        init_mlp(&trunk, &mut online, rng);
        init_mlp(&value, &mut online, rng);
        for h in &branch_heads {
            init_mlp(h, &mut online, rng);
        }
        let target = online.clone();
        BdqNetwork {
            n_nodes,
            n_actions,
            arch: arch.clone(),
            edges,
            convs,
            trunk,
            value,
            branch_heads,
            n_params,
            online,
            target,
        }
    }

    pub fn arch(&self) -> &BdqArch {
        &self.arch
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn branches(&self) -> usize {
        self.branch_heads.len()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Full forward pass with activation caches for the backward pass.
    pub fn forward(&self, params: &[f64], states: &Tensor) -> Result<BdqCache, NeuralError> {
        assert_eq!(states.cols(), self.n_nodes, "state width mismatch");
        let mut conv_caches = Vec::with_capacity(self.convs.len());
        let mut conv_outs: Vec<Tensor> = vec![states.clone()];
        for c in &self.convs {
            let (out, cache) = graph_conv_forward(
                c,
                params,
                conv_outs.last().expect("non-empty"),
                self.n_nodes,
                &self.edges,
            );
            conv_caches.push(cache);
            conv_outs.push(out);
        }
        let trunk = mlp_forward(&self.trunk, params, conv_outs.last().expect("non-empty"));
        let value = mlp_forward(&self.value, params, trunk.output());
        let branches: Vec<MlpCache> = self
            .branch_heads
            .iter()
            .map(|h| mlp_forward(h, params, trunk.output()))
            .collect();

        let b = states.rows();
        let a = self.n_actions;
        let mut q = Vec::with_capacity(branches.len());
        for cache in &branches {
            let adv = cache.output();
            let mut qd = Tensor::zeros(b, a);
            for r in 0..b {
                let mean = adv.row(r).iter().sum::<f64>() / a as f64;
                let v = value.output().at(r, 0);
                for (qv, &av) in qd.row_mut(r).iter_mut().zip(adv.row(r)) {
                    *qv = v + av - mean;
                }
            }
            if !qd.is_finite() {
                return Err(NeuralError::NonFinite("action values"));
            }
            q.push(qd);
        }
        Ok(BdqCache {
            conv_caches,
            trunk,
            value,
            branches,
            q,
        })
    }

    /// Backward pass from per-branch gradients at the Q outputs. Returns the
    /// flat parameter gradient.
    pub fn backward(
        &self,
        params: &[f64],
        cache: &BdqCache,
        dq: &[Tensor],
    ) -> Result<Vec<f64>, NeuralError> {
        assert_eq!(dq.len(), self.branch_heads.len());
        let b = cache.q[0].rows();
        let a = self.n_actions;
        let mut grads = vec![0.0; self.n_params];
        let trunk_out = cache.trunk.output();
        let mut d_trunk = Tensor::zeros(b, trunk_out.cols());
        let mut dv = Tensor::zeros(b, 1);

        for (d, head) in self.branch_heads.iter().enumerate() {
            // Q_d = V + A_d − mean(A_d): advantage gradient is the centered
            // Q gradient, the row sums flow into the value head
            let mut da = Tensor::zeros(b, a);
            for r in 0..b {
                let row = dq[d].row(r);
                let sum: f64 = row.iter().sum();
                *dv.at_mut(r, 0) += sum;
                let mean = sum / a as f64;
                for (out, &g) in da.row_mut(r).iter_mut().zip(row) {
                    *out = g - mean;
                }
            }
            let dt = mlp_backward(head, params, &cache.branches[d], &da, &mut grads);
            for (acc, &g) in d_trunk.data_mut().iter_mut().zip(dt.data()) {
                *acc += g;
            }
        }
        let dt = mlp_backward(&self.value, params, &cache.value, &dv, &mut grads);
        for (acc, &g) in d_trunk.data_mut().iter_mut().zip(dt.data()) {
            *acc += g;
        }

        let mut d_feat = mlp_backward(&self.trunk, params, &cache.trunk, &d_trunk, &mut grads);
        for (i, c) in self.convs.iter().enumerate().rev() {
            d_feat = graph_conv_backward(
                c,
                params,
                &cache.conv_caches[i],
                &d_feat,
                self.n_nodes,
                &self.edges,
                &mut grads,
            );
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(NeuralError::NonFinite("parameter gradient"));
        }
        Ok(grads)
    }
}

#[derive(Debug, Clone)]
pub struct BdqCache {
    conv_caches: Vec<GraphConvCache>,
    trunk: MlpCache,
    value: MlpCache,
    branches: Vec<MlpCache>,
    /// Per-branch action values, each [B×n_actions].
    pub q: Vec<Tensor>,
}

impl BdqCache {
    /// Per-branch greedy action for every row; ties break to the lowest
    /// action index.
    pub fn greedy(&self) -> Vec<Vec<usize>> {
        let b = self.q[0].rows();
        (0..b)
            .map(|r| self.q.iter().map(|qd| argmax(qd.row(r))).collect())
            .collect()
    }

    pub fn state_values(&self) -> &Tensor {
        self.value.output()
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Collapse a batch to its unique rows. Returns the unique tensor and, for
/// each original row, the index of its representative.
pub(crate) fn dedup_rows(t: &Tensor) -> (Tensor, Vec<usize>) {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut unique: Vec<f64> = Vec::new();
    let mut map = Vec::with_capacity(t.rows());
    for r in 0..t.rows() {
        let key: Vec<u64> = t.row(r).iter().map(|v| v.to_bits()).collect();
        let next = seen.len();
        let idx = *seen.entry(key).or_insert(next);
        if idx == next {
            unique.extend_from_slice(t.row(r));
        }
        map.push(idx);
    }
    (
        Tensor::from_vec(seen.len(), t.cols(), unique),
        map,
    )
}

/// Per-branch TD targets: y_d = r + γ·Q⁻_d(s', argmax_a Q_d(s',a)), or r on
/// terminal items. The argmax is taken on the online parameters, the value
/// on the target parameters.
pub fn bdq_targets(
    net: &BdqNetwork,
    next_states: &Tensor,
    rewards: &[f64],
    done: &[bool],
    gamma: f64,
) -> Result<Tensor, NeuralError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(NeuralError::BadDiscount(gamma));
    }
    let b = next_states.rows();
    assert_eq!(rewards.len(), b);
    assert_eq!(done.len(), b);
    let d = net.branches();
    let mut y = Tensor::zeros(b, d);
    if done.iter().all(|&t| t) {
        for i in 0..b {
            y.row_mut(i).fill(rewards[i]);
        }
        return Ok(y);
    }
    let (unique, map) = dedup_rows(next_states);
    let online = net.forward(&net.online, &unique)?;
    let target = net.forward(&net.target, &unique)?;
    let greedy = online.greedy();
    for i in 0..b {
        let u = map[i];
        for k in 0..d {
            y.row_mut(i)[k] = if done[i] {
                rewards[i]
            } else {
                rewards[i] + gamma * target.q[k].at(u, greedy[u][k])
            };
        }
    }
    if !y.is_finite() {
        return Err(NeuralError::NonFinite("TD targets"));
    }
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct BdqLoss {
    pub loss: f64,
    /// Per-item mean absolute TD error across branches.
    pub td_abs: Vec<f64>,
    pub grads: Option<Vec<f64>>,
}

/// Importance-weighted squared TD error and its parameter gradient.
///
/// `actions` stores item i's branch choices at `[i·D .. (i+1)·D]`. The loss
/// is mean over items of w_i · mean over branches of (Q_d(s,a_d) − y_d)².
pub fn bdq_loss(
    net: &BdqNetwork,
    params: &[f64],
    states: &Tensor,
    actions: &[usize],
    targets: &Tensor,
    weights: &[f64],
    want_grads: bool,
) -> Result<BdqLoss, NeuralError> {
    let b = states.rows();
    let d = net.branches();
    assert_eq!(actions.len(), b * d);
    assert_eq!(targets.rows(), b);
    assert_eq!(targets.cols(), d);
    assert_eq!(weights.len(), b);

    let (unique, map) = dedup_rows(states);
    let cache = net.forward(params, &unique)?;

    let mut loss = 0.0;
    let mut td_abs = vec![0.0; b];
    let mut dq: Vec<Tensor> = (0..d)
        .map(|_| Tensor::zeros(unique.rows(), net.n_actions()))
        .collect();
    let scale = 1.0 / (b as f64 * d as f64);
    for i in 0..b {
        let u = map[i];
        for k in 0..d {
            let a = actions[i * d + k];
            let delta = cache.q[k].at(u, a) - targets.at(i, k);
            loss += weights[i] * delta * delta;
            td_abs[i] += delta.abs();
            if want_grads {
                *dq[k].at_mut(u, a) += 2.0 * weights[i] * delta * scale;
            }
        }
    }
    loss *= scale;
    for t in td_abs.iter_mut() {
        *t /= d as f64;
    }
    if !loss.is_finite() {
        return Err(NeuralError::NonFinite("loss"));
    }
    let grads = if want_grads {
        Some(net.backward(params, &cache, &dq)?)
    } else {
        None
    };
    Ok(BdqLoss { loss, td_abs, grads })
}
