//! Fully connected layers over a single flat parameter buffer.
//!
//! Every layer is described by offsets into that buffer rather than owning
//! its weights. Keeping all parameters of a network in one `Vec<f64>` makes
//! the global-norm clip, the optimizer step, the target-network blend, and
//! checkpointing one-loop affairs, and lets finite-difference tests perturb
//! any single parameter by plain index.

use super::tensor::{accum_dw, matmul_dyw, matmul_xwt, view2, view2_mut, Tensor};
use crate::rng::RngStream;

/// One dense layer: y = x·Wᵀ + b, optionally rectified. W is stored row-major
/// [n_out×n_in] at `w_off`, followed by the bias at `b_off`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseSpec {
    pub w_off: usize,
    pub b_off: usize,
    pub n_in: usize,
    pub n_out: usize,
    pub relu: bool,
}

/// Hands out parameter offsets in declaration order.
#[derive(Debug, Default)]
pub struct ParamAlloc {
    next: usize,
}

impl ParamAlloc {
    pub fn new() -> Self {
        ParamAlloc { next: 0 }
    }

    pub fn dense(&mut self, n_in: usize, n_out: usize, relu: bool) -> DenseSpec {
        let w_off = self.next;
        let b_off = w_off + n_in * n_out;
        self.next = b_off + n_out;
        DenseSpec {
            w_off,
            b_off,
            n_in,
            n_out,
            relu,
        }
    }

    pub fn total(&self) -> usize {
        self.next
    }
}

/// A stack of dense layers; hidden layers are rectified, the last one is
/// rectified only if requested at build time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub layers: Vec<DenseSpec>,
}

impl MlpSpec {
    pub fn build(
        alloc: &mut ParamAlloc,
        n_in: usize,
        hidden: &[usize],
        n_out: usize,
        relu_out: bool,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = n_in;
        for &h in hidden {
            layers.push(alloc.dense(width, h, true));
            width = h;
        }
        layers.push(alloc.dense(width, n_out, relu_out));
        MlpSpec { layers }
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_out(&self) -> usize {
        self.layers.last().expect("at least one layer").n_out
    }
}

/// Activations recorded during a forward pass: entry 0 is the input, entry
/// i+1 the (post-rectifier) output of layer i.
#[derive(Debug, Clone)]
pub struct MlpCache {
    pub acts: Vec<Tensor>,
}

impl MlpCache {
    pub fn output(&self) -> &Tensor {
        self.acts.last().expect("forward ran")
    }
}

pub fn dense_forward(spec: &DenseSpec, params: &[f64], x: &Tensor) -> Tensor {
    assert_eq!(x.cols(), spec.n_in, "input width mismatch");
    let mut y = Tensor::zeros(x.rows(), spec.n_out);
    let w = view2(spec.n_out, spec.n_in, &params[spec.w_off..spec.w_off + spec.n_in * spec.n_out]);
    matmul_xwt(x, w, &mut y);
    let b = &params[spec.b_off..spec.b_off + spec.n_out];
    for r in 0..y.rows() {
        let row = y.row_mut(r);
        for (v, bv) in row.iter_mut().zip(b) {
            *v += bv;
        }
    }
    if spec.relu {
        for v in y.data_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    y
}

/// Gradient of one layer. `x` is its forward input, `y` its forward output
/// (used only for the rectifier mask), `dy` the gradient at the output.
/// Accumulates into `grads` and returns the gradient at the input.
pub fn dense_backward(
    spec: &DenseSpec,
    params: &[f64],
    x: &Tensor,
    y: &Tensor,
    dy: &Tensor,
    grads: &mut [f64],
) -> Tensor {
    let mut dy = dy.clone();
    if spec.relu {
        for (g, &out) in dy.data_mut().iter_mut().zip(y.data()) {
            if out <= 0.0 {
                *g = 0.0;
            }
        }
    }
    let nw = spec.n_in * spec.n_out;
    accum_dw(
        &dy,
        x,
        view2_mut(spec.n_out, spec.n_in, &mut grads[spec.w_off..spec.w_off + nw]),
    );
    let db = &mut grads[spec.b_off..spec.b_off + spec.n_out];
    for r in 0..dy.rows() {
        for (g, &v) in db.iter_mut().zip(dy.row(r)) {
            *g += v;
        }
    }
    let mut dx = Tensor::zeros(dy.rows(), spec.n_in);
    let w = view2(spec.n_out, spec.n_in, &params[spec.w_off..spec.w_off + nw]);
    matmul_dyw(&dy, w, &mut dx);
    dx
}

pub fn mlp_forward(spec: &MlpSpec, params: &[f64], x: &Tensor) -> MlpCache {
    assert_eq!(x.cols(), spec.n_in(), "input width mismatch");
    let mut acts = Vec::with_capacity(spec.layers.len() + 1);
    acts.push(x.clone());
    for layer in &spec.layers {
        let y = dense_forward(layer, params, acts.last().expect("non-empty"));
        acts.push(y);
    }
    MlpCache { acts }
}

pub fn mlp_backward(
    spec: &MlpSpec,
    params: &[f64],
    cache: &MlpCache,
    dy: &Tensor,
    grads: &mut [f64],
) -> Tensor {
    let mut grad = dy.clone();
    for (i, layer) in spec.layers.iter().enumerate().rev() {
        grad = dense_backward(layer, params, &cache.acts[i], &cache.acts[i + 1], &grad, grads);
    }
    grad
}

/// He-uniform weights (±sqrt(6/fan_in)), zero biases, filled in layer order.
pub fn init_dense(spec: &DenseSpec, params: &mut [f64], rng: &mut RngStream) {
    let limit = (6.0 / spec.n_in as f64).sqrt();
    for i in 0..spec.n_in * spec.n_out {
        params[spec.w_off + i] = rng.range_f64(-limit, limit);
    }
    for i in 0..spec.n_out {
        params[spec.b_off + i] = 0.0;
    }
}

pub fn init_mlp(spec: &MlpSpec, params: &mut [f64], rng: &mut RngStream) {
    for layer in &spec.layers {
        init_dense(layer, params, rng);
    }
}
