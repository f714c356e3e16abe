//! Graph convolution over the wiring of a Boolean network.
//!
//! For node v with in-neighbours N(v), the layer computes
//! x'_v = Σ_{u∈N(v)} h_Θ(x_v ‖ x_u − x_v), where h_Θ is a one-hidden-layer
//! rectified perceptron shared across edges. Conditioning each message on
//! the difference x_u − x_v lets the kernel express interventions relative
//! to the receiving node. Nodes with no in-edges output the zero vector.
//! Edge messages are summed in the stored (child, parent) edge order, so
//! outputs are bit-reproducible.

use super::dense::{mlp_backward, mlp_forward, MlpCache, MlpSpec, ParamAlloc};
use super::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphConvSpec {
    pub kernel: MlpSpec,
    pub f_in: usize,
    pub f_out: usize,
}

impl GraphConvSpec {
    pub fn build(alloc: &mut ParamAlloc, f_in: usize, hidden: usize, f_out: usize) -> Self {
        let kernel = MlpSpec::build(alloc, 2 * f_in, &[hidden], f_out, false);
        GraphConvSpec { kernel, f_in, f_out }
    }
}

#[derive(Debug, Clone)]
pub struct GraphConvCache {
    kernel: MlpCache,
    batch: usize,
}

impl GraphConvCache {
    pub(super) fn kernel(&self) -> &MlpCache {
        &self.kernel
    }
}

/// Forward pass. `h` holds node features flattened per sample ([B × n·f_in],
/// node-major); `edges` are (parent, child) pairs. Returns [B × n·f_out].
pub fn graph_conv_forward(
    spec: &GraphConvSpec,
    params: &[f64],
    h: &Tensor,
    n_nodes: usize,
    edges: &[(usize, usize)],
) -> (Tensor, GraphConvCache) {
    let (f, fo) = (spec.f_in, spec.f_out);
    assert_eq!(h.cols(), n_nodes * f, "feature width mismatch");
    let b = h.rows();
    let e = edges.len();

    let mut edge_in = Tensor::zeros(b * e, 2 * f);
    for bi in 0..b {
        let row = h.row(bi);
        for (ei, &(u, v)) in edges.iter().enumerate() {
            let out = edge_in.row_mut(bi * e + ei);
            for k in 0..f {
                out[k] = row[v * f + k];
                out[f + k] = row[u * f + k] - row[v * f + k];
            }
        }
    }

    let kernel = mlp_forward(&spec.kernel, params, &edge_in);
    let msgs = kernel.output();
    let mut out = Tensor::zeros(b, n_nodes * fo);
    for bi in 0..b {
        for (ei, &(_, v)) in edges.iter().enumerate() {
            let m = msgs.row(bi * e + ei);
            let dst = out.row_mut(bi);
            for k in 0..fo {
                dst[v * fo + k] += m[k];
            }
        }
    }
    (out, GraphConvCache { kernel, batch: b })
}

/// Backward pass: accumulates kernel gradients into `grads` and returns the
/// gradient with respect to the input features.
pub fn graph_conv_backward(
    spec: &GraphConvSpec,
    params: &[f64],
    cache: &GraphConvCache,
    d_out: &Tensor,
    n_nodes: usize,
    edges: &[(usize, usize)],
    grads: &mut [f64],
) -> Tensor {
    let (f, fo) = (spec.f_in, spec.f_out);
    let b = cache.batch;
    let e = edges.len();

    let mut d_msgs = Tensor::zeros(b * e, fo);
    for bi in 0..b {
        let src = d_out.row(bi);
        for (ei, &(_, v)) in edges.iter().enumerate() {
            d_msgs.row_mut(bi * e + ei).copy_from_slice(&src[v * fo..(v + 1) * fo]);
        }
    }

    let d_edge_in = mlp_backward(&spec.kernel, params, &cache.kernel, &d_msgs, grads);

    let mut dh = Tensor::zeros(b, n_nodes * f);
    for bi in 0..b {
        let dst = dh.row_mut(bi);
        for (ei, &(u, v)) in edges.iter().enumerate() {
            let g = d_edge_in.row(bi * e + ei);
            for k in 0..f {
                dst[v * f + k] += g[k] - g[f + k];
                dst[u * f + k] += g[f + k];
            }
        }
    }
    dh
}
