//! Finite-difference validation of the analytic gradients. Exposed as
//! library functions so integration tests can run the same sweeps the unit
//! tests use.

use super::bdq::{bdq_loss, BdqArch, BdqNetwork};
use super::dense::{dense_forward, init_mlp, mlp_backward, mlp_forward, MlpCache, MlpSpec, ParamAlloc};
use super::graphconv::{graph_conv_backward, graph_conv_forward, GraphConvSpec};
use super::tensor::Tensor;
use crate::rng::RngStream;

const STEP: f64 = 1e-5;
/// Smallest rectifier preactivation magnitude accepted for a finite
/// difference: a ±STEP parameter change moves preactivations by at most a
/// few×STEP, so anything this far from the corner cannot flip its mask.
const KINK_GUARD: f64 = 1e-3;

/// Closest approach to a rectifier corner across all rectified layers of a
/// recorded forward pass. Central differences straddling a corner measure
/// the wrong slope, so instantiations closer than [`KINK_GUARD`] are
/// redrawn rather than compared.
fn kink_margin(spec: &MlpSpec, params: &[f64], cache: &MlpCache) -> f64 {
    let mut margin = f64::INFINITY;
    for (i, layer) in spec.layers.iter().enumerate() {
        if !layer.relu {
            continue;
        }
        let mut linear = *layer;
        linear.relu = false;
        let z = dense_forward(&linear, params, &cache.acts[i]);
        for &v in z.data() {
            margin = margin.min(v.abs());
        }
    }
    margin
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

fn central_diff(params: &mut [f64], idx: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let orig = params[idx];
    params[idx] = orig + STEP;
    let fp = f(params);
    params[idx] = orig - STEP;
    let fm = f(params);
    params[idx] = orig;
    (fp - fm) / (2.0 * STEP)
}

/// Random rectified stacks (covers the trunk and both head shapes): compare
/// every parameter's analytic gradient of a fixed linear readout against
/// central differences. Returns the worst relative error seen.
pub fn mlp_gradients_vs_finite_difference(instantiations: usize, seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..instantiations {
        let mut retry = 0;
        let (spec, total, mut params, x, readout, cache) = loop {
            let mut rng = RngStream::new(seed, &format!("mlp{i}.{retry}"));
            let n_in = 1 + rng.index(4);
            let n_hidden = rng.index(3);
            let hidden: Vec<usize> = (0..n_hidden).map(|_| 2 + rng.index(4)).collect();
            let n_out = 1 + rng.index(3);
            let relu_out = rng.chance(0.5);
            let mut alloc = ParamAlloc::new();
            let spec = MlpSpec::build(&mut alloc, n_in, &hidden, n_out, relu_out);
            let mut params = vec![0.0; alloc.total()];
            init_mlp(&spec, &mut params, &mut rng);
            let b = 1 + rng.index(3);
            let x = Tensor::from_vec(
                b,
                n_in,
                (0..b * n_in).map(|_| rng.range_f64(-1.0, 1.0)).collect(),
            );
            let readout: Vec<f64> = (0..b * n_out).map(|_| rng.range_f64(-1.0, 1.0)).collect();
            let cache = mlp_forward(&spec, &params, &x);
            if kink_margin(&spec, &params, &cache) > KINK_GUARD {
                break (spec, alloc.total(), params, x, readout, cache);
            }
            retry += 1;
            assert!(retry < 32, "no corner-free draw after 32 tries");
        };
        let b = x.rows();
        let n_out = spec.n_out();
        let mut grads = vec![0.0; total];
        mlp_backward(
            &spec,
            &params,
            &cache,
            &Tensor::from_vec(b, n_out, readout.clone()),
            &mut grads,
        );
        for idx in 0..total {
            let num = central_diff(&mut params, idx, |p| {
                let c = mlp_forward(&spec, p, &x);
                c.output().data().iter().zip(&readout).map(|(a, r)| a * r).sum()
            });
            worst = worst.max(rel_err(grads[idx], num));
        }
    }
    worst
}

/// Random small graphs and kernel shapes for the convolution layer.
pub fn conv_gradients_vs_finite_difference(instantiations: usize, seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..instantiations {
        let mut retry = 0;
        let (spec, total, mut params, h, n, edges, readout, cache) = loop {
            let mut rng = RngStream::new(seed, &format!("conv{i}.{retry}"));
            let n = 2 + rng.index(3);
            let f_in = 1 + rng.index(3);
            let f_out = 1 + rng.index(3);
            let hidden = 2 + rng.index(4);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if rng.chance(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let mut alloc = ParamAlloc::new();
            let spec = GraphConvSpec::build(&mut alloc, f_in, hidden, f_out);
            let mut params = vec![0.0; alloc.total()];
            init_mlp(&spec.kernel, &mut params, &mut rng);
            let b = 1 + rng.index(2);
            let h = Tensor::from_vec(
                b,
                n * f_in,
                (0..b * n * f_in).map(|_| rng.range_f64(-1.0, 1.0)).collect(),
            );
            let readout: Vec<f64> =
                (0..b * n * f_out).map(|_| rng.range_f64(-1.0, 1.0)).collect();
            let (_, cache) = graph_conv_forward(&spec, &params, &h, n, &edges);
            if edges.is_empty() || kink_margin(&spec.kernel, &params, cache.kernel()) > KINK_GUARD
            {
                break (spec, alloc.total(), params, h, n, edges, readout, cache);
            }
            retry += 1;
            assert!(retry < 32, "no corner-free draw after 32 tries");
        };
        let b = h.rows();
        let mut grads = vec![0.0; total];
        graph_conv_backward(
            &spec,
            &params,
            &cache,
            &Tensor::from_vec(b, n * spec.f_out, readout.clone()),
            n,
            &edges,
            &mut grads,
        );
        for idx in 0..total {
            let num = central_diff(&mut params, idx, |p| {
                let (out, _) = graph_conv_forward(&spec, p, &h, n, &edges);
                out.data().iter().zip(&readout).map(|(a, r)| a * r).sum()
            });
            worst = worst.max(rel_err(grads[idx], num));
        }
    }
    worst
}

/// Random miniature networks and batches through the full loss: dueling
/// aggregation, both heads, trunk, and the convolution stack together.
pub fn bdq_gradients_vs_finite_difference(instantiations: usize, seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..instantiations {
        let mut rng = RngStream::new(seed, &format!("bdq{i}"));
        let n = 2 + rng.index(3);
        let arch = BdqArch {
            conv_widths: (0..1 + rng.index(2)).map(|_| 1 + rng.index(3)).collect(),
            kernel_hidden: 2 + rng.index(3),
            trunk_widths: (0..1 + rng.index(2)).map(|_| 2 + rng.index(4)).collect(),
            head_hidden: (0..rng.index(2)).map(|_| 2 + rng.index(3)).collect(),
            branches: 1 + rng.index(3),
        };
        let n_actions = 2 + rng.index(3);
        let mut edges = vec![(0, 0)];
        for u in 0..n {
            for v in 0..n {
                if (u, v) != (0, 0) && rng.chance(0.4) {
                    edges.push((u, v));
                }
            }
        }
        let mut net = BdqNetwork::new(n, edges, n_actions, &arch, &mut rng);
        // binary states plus zero-init biases would park kernel
        // preactivations exactly on the rectifier kink, where central
        // differences straddle the corner; jitter every parameter off it
        for p in net.online.iter_mut() {
            *p += rng.range_f64(-0.2, 0.2);
        }
        let b = 1 + rng.index(3);
        let states = Tensor::from_vec(
            b,
            n,
            (0..b * n).map(|_| if rng.chance(0.5) { 1.0 } else { 0.0 }).collect(),
        );
        let d = net.branches();
        let actions: Vec<usize> = (0..b * d).map(|_| rng.index(n_actions)).collect();
        let targets = Tensor::from_vec(
            b,
            d,
            (0..b * d).map(|_| rng.range_f64(-2.0, 2.0)).collect(),
        );
        let weights: Vec<f64> = (0..b).map(|_| rng.range_f64(0.1, 1.0)).collect();
        let analytic = bdq_loss(&net, &net.online, &states, &actions, &targets, &weights, true)
            .unwrap()
            .grads
            .unwrap();
        let mut params = net.online.clone();
        for idx in 0..params.len() {
            let num = central_diff(&mut params, idx, |p| {
                bdq_loss(&net, p, &states, &actions, &targets, &weights, false)
                    .unwrap()
                    .loss
            });
            worst = worst.max(rel_err(analytic[idx], num));
        }
    }
    worst
}
