//! Adam with bias correction, a global-norm gradient clip, and the Polyak
//! blend that tracks the target parameter set.

use super::NeuralError;

#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub clip: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64, clip: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Clip `grads` to the global-norm budget, then apply one Adam update to
    /// `params`. Returns the pre-clip gradient norm.
    pub fn step(&mut self, params: &mut [f64], grads: &mut [f64]) -> Result<f64, NeuralError> {
        assert_eq!(params.len(), self.m.len(), "parameter count mismatch");
        assert_eq!(grads.len(), self.m.len(), "gradient count mismatch");
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(NeuralError::NonFinite("gradient"));
        }
        let norm = clip_global_norm(grads, self.clip);
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
        Ok(norm)
    }
}

/// Scale `grads` in place so their Euclidean norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= s;
        }
    }
    norm
}

/// θ⁻ ← τ·θ + (1−τ)·θ⁻, elementwise.
pub fn soft_update(target: &mut [f64], online: &[f64], tau: f64) {
    assert_eq!(target.len(), online.len(), "parameter count mismatch");
    for (t, &o) in target.iter_mut().zip(online) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = AdamState::new(3, 1e-2, 10.0);
        let mut params = vec![1.0, -2.0, 0.5];
        let mut grads = vec![0.0; 3];
        adam.step(&mut params, &mut grads).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_roughly_lr() {
        let mut adam = AdamState::new(1, 1e-3, 10.0);
        let mut params = vec![0.0];
        let mut grads = vec![2.5];
        adam.step(&mut params, &mut grads).unwrap();
        // bias-corrected mhat/sqrt(vhat) = g/|g| on the first step
        assert!((params[0] + 1e-3).abs() < 1e-9);
    }

    #[test]
    fn clip_scales_to_budget() {
        let mut grads = vec![60.0, 80.0]; // norm 100
        let norm = clip_global_norm(&mut grads, 10.0);
        assert_eq!(norm, 100.0);
        assert!((grads[0] - 6.0).abs() < 1e-12);
        assert!((grads[1] - 8.0).abs() < 1e-12);
        let mut small = vec![3.0, 4.0];
        assert_eq!(clip_global_norm(&mut small, 10.0), 5.0);
        assert_eq!(small, vec![3.0, 4.0]);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut adam = AdamState::new(1, 1e-3, 10.0);
        let mut params = vec![0.0];
        let mut grads = vec![f64::NAN];
        assert!(matches!(
            adam.step(&mut params, &mut grads),
            Err(NeuralError::NonFinite(_))
        ));
    }

    #[test]
    fn soft_update_endpoints_and_contraction() {
        let online = vec![1.0, 2.0];
        let mut t = vec![0.0, 0.0];
        soft_update(&mut t, &online, 0.0);
        assert_eq!(t, vec![0.0, 0.0]);
        soft_update(&mut t, &online, 1.0);
        assert_eq!(t, online);
        let mut t = vec![0.0, 0.0];
        let mut gap = 0.0;
        for k in 0..5 {
            let prev: Vec<f64> = t.clone();
            soft_update(&mut t, &online, 0.25);
            let d: f64 = t.iter().zip(&online).map(|(a, b)| (a - b).abs()).sum();
            if k > 0 {
                let dp: f64 = prev.iter().zip(&online).map(|(a, b)| (a - b).abs()).sum();
                assert!((d - 0.75 * dp).abs() < 1e-12);
            }
            gap = d;
        }
        assert!(gap < 1.0);
    }
}
