//! Proportional prioritized replay on a sum tree.
//!
//! Leaves store priority^α. New items enter at the highest priority seen so
//! far so everything is learned from at least once; sampling is stratified
//! over equal slices of the total mass; importance weights are β-corrected
//! and normalized by the batch maximum.

use super::AgentError;
use crate::rng::RngStream;

#[derive(Debug)]
pub struct PrioritizedReplay<T> {
    capacity: usize,
    alpha: f64,
    floor: f64,
    tree: Vec<f64>,
    items: Vec<Option<T>>,
    next: usize,
    len: usize,
    max_leaf: f64,
}

#[derive(Debug, Clone)]
pub struct SampledBatch<T> {
    pub indices: Vec<usize>,
    pub items: Vec<T>,
    pub weights: Vec<f64>,
}

impl<T: Clone> PrioritizedReplay<T> {
    pub fn new(capacity: usize, alpha: f64, floor: f64) -> Self {
        assert!(capacity > 0);
        PrioritizedReplay {
            capacity,
            alpha,
            floor,
            tree: vec![0.0; 2 * capacity],
            items: vec![None; capacity],
            next: 0,
            len: 0,
            max_leaf: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn set_leaf(&mut self, slot: usize, value: f64) {
        let mut i = self.capacity + slot;
        self.tree[i] = value;
        while i > 1 {
            i /= 2;
            self.tree[i] = self.tree[2 * i] + self.tree[2 * i + 1];
        }
    }

    /// Append at maximum priority, evicting the oldest entry once full.
    pub fn push(&mut self, item: T) {
        self.items[self.next] = Some(item);
        self.set_leaf(self.next, self.max_leaf);
        self.next = (self.next + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Stratified proportional sample of `batch` items with β-corrected
    /// importance weights.
    pub fn sample(
        &self,
        batch: usize,
        beta: f64,
        rng: &mut RngStream,
    ) -> Result<SampledBatch<T>, AgentError> {
        if self.len < batch {
            return Err(AgentError::ReplayUnderfull {
                len: self.len,
                need: batch,
            });
        }
        let total = self.tree[1];
        debug_assert!(total > 0.0);
        let seg = total / batch as f64;
        let mut indices = Vec::with_capacity(batch);
        let mut items = Vec::with_capacity(batch);
        let mut weights = Vec::with_capacity(batch);
        for k in 0..batch {
            let mut r = seg * (k as f64 + rng.unit());
            let mut node = 1;
            while node < self.capacity {
                let left = 2 * node;
                if r < self.tree[left] {
                    node = left;
                } else {
                    r -= self.tree[left];
                    node = left + 1;
                }
            }
            let mut slot = node - self.capacity;
            if self.items[slot].is_none() {
                // float round-off walked past the last live leaf
                slot = self.len - 1;
            }
            let p = self.tree[self.capacity + slot] / total;
            weights.push((self.len as f64 * p).powf(-beta));
            items.push(self.items[slot].clone().expect("live slot"));
            indices.push(slot);
        }
        let wmax = weights.iter().cloned().fold(f64::MIN, f64::max);
        for w in weights.iter_mut() {
            *w /= wmax;
        }
        Ok(SampledBatch {
            indices,
            items,
            weights,
        })
    }

    /// Set priorities to |TD error| + floor (exponentiated by α inside).
    pub fn update_priorities(&mut self, indices: &[usize], td_abs: &[f64]) {
        assert_eq!(indices.len(), td_abs.len());
        for (&slot, &td) in indices.iter().zip(td_abs) {
            let leaf = (td.abs() + self.floor).powf(self.alpha);
            self.max_leaf = self.max_leaf.max(leaf);
            self.set_leaf(slot, leaf);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_priorities_sample_uniformly_with_unit_weights() {
        let mut rep: PrioritizedReplay<usize> = PrioritizedReplay::new(8, 0.6, 1e-3);
        for i in 0..8 {
            rep.push(i);
        }
        let mut rng = RngStream::new(1, "rep");
        let mut counts = [0usize; 8];
        for _ in 0..2000 {
            let b = rep.sample(4, 0.4, &mut rng).unwrap();
            assert!(b.weights.iter().all(|&w| (w - 1.0).abs() < 1e-12));
            for i in b.indices {
                counts[i] += 1;
            }
        }
        // 8000 draws, expect 1000 each; 5σ ≈ 150
        for (i, &c) in counts.iter().enumerate() {
            assert!((c as i64 - 1000).abs() < 200, "slot {i}: {c}");
        }
    }

    #[test]
    fn dominant_priority_dominates_sampling() {
        let mut rep: PrioritizedReplay<usize> = PrioritizedReplay::new(4, 1.0, 0.0);
        for i in 0..4 {
            rep.push(i);
        }
        rep.update_priorities(&[0, 1, 2, 3], &[0.99, 0.004, 0.003, 0.003]);
        let mut rng = RngStream::new(2, "rep");
        let mut hits = 0;
        let mut draws = 0;
        for _ in 0..500 {
            let b = rep.sample(4, 1.0, &mut rng).unwrap();
            draws += b.indices.len();
            hits += b.indices.iter().filter(|&&i| i == 0).count();
        }
        let freq = hits as f64 / draws as f64;
        assert!(freq > 0.93 && freq < 1.0, "freq {freq}");
    }

    #[test]
    fn weights_reflect_inverse_probability() {
        let mut rep: PrioritizedReplay<usize> = PrioritizedReplay::new(2, 1.0, 0.0);
        rep.push(0);
        rep.push(1);
        rep.update_priorities(&[0, 1], &[3.0, 1.0]);
        let mut rng = RngStream::new(3, "rep");
        let b = rep.sample(2, 1.0, &mut rng).unwrap();
        // p = (0.75, 0.25): raw w = (2·p)^-1 = (2/3, 2); normalized by max
        for (i, w) in b.indices.iter().zip(&b.weights) {
            let expect = match i {
                0 => (2.0f64 / 3.0) / 2.0,
                _ => 1.0,
            };
            assert!((w - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut rep: PrioritizedReplay<usize> = PrioritizedReplay::new(4, 0.6, 1e-3);
        for i in 0..6 {
            rep.push(i);
        }
        assert_eq!(rep.len(), 4);
        let mut rng = RngStream::new(4, "rep");
        for _ in 0..50 {
            let b = rep.sample(4, 1.0, &mut rng).unwrap();
            assert!(b.items.iter().all(|&v| v >= 2), "evicted item sampled");
        }
    }

    #[test]
    fn underfull_sampling_is_an_error() {
        let mut rep: PrioritizedReplay<usize> = PrioritizedReplay::new(8, 0.6, 1e-3);
        rep.push(1);
        let mut rng = RngStream::new(5, "rep");
        assert!(matches!(
            rep.sample(2, 0.4, &mut rng),
            Err(AgentError::ReplayUnderfull { len: 1, need: 2 })
        ));
    }

    #[test]
    fn new_items_enter_at_max_priority() {
        let mut rep: PrioritizedReplay<usize> = PrioritizedReplay::new(4, 1.0, 0.0);
        rep.push(0);
        rep.update_priorities(&[0], &[10.0]);
        rep.push(1); // should enter at leaf 10, not 1.0
        let mut rng = RngStream::new(6, "rep");
        let mut c1 = 0;
        let mut total = 0;
        for _ in 0..200 {
            let b = rep.sample(2, 1.0, &mut rng).unwrap();
            total += b.indices.len();
            c1 += b.indices.iter().filter(|&&i| i == 1).count();
        }
        let freq = c1 as f64 / total as f64;
        assert!(freq > 0.35 && freq < 0.65, "freq {freq}");
    }
}
