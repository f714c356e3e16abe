//! Seeded deterministic random streams.
//!
//! Every stochastic routine in the crate draws from an [`RngStream`] instead
//! of a global generator. A stream is addressed by a 64-bit seed plus a label
//! path; forking a substream derives a fresh generator from the root seed and
//! the extended path only, never from the parent's draw position. Reordering
//! or adding draws in one stream therefore cannot shift any other stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stable 64-bit FNV-1a hash. Used to key substreams and to fingerprint
/// serialized models; not a cryptographic digest.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic random stream addressed by `(seed, label path)`.
#[derive(Clone)]
pub struct RngStream {
    seed: u64,
    path: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for `seed` under `label`.
    pub fn new(seed: u64, label: &str) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&fnv1a64(label.as_bytes()).to_le_bytes());
        key[16..24].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
        key[24..32].copy_from_slice(&(label.len() as u64).to_le_bytes());
        RngStream {
            seed,
            path: label.to_string(),
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Derive an independent stream under `self`'s label path. The child
    /// depends only on the root seed and the extended path, not on how many
    /// draws the parent has made.
    pub fn substream(&self, label: &str) -> Self {
        Self::new(self.seed, &format!("{}/{}", self.path, label))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.path
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform index over an empty range");
        self.rng.random_range(0..n)
    }

    /// Uniform draw from `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }
}
