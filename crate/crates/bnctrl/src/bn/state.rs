//! Packed Boolean state vectors and partial assignments.

use smallvec::SmallVec;
use std::cmp::Ordering;
use std::fmt;

use crate::rng::RngStream;

/// One Boolean value per network node, bit-packed.
///
/// Node `i` lives at bit `i % 64` of word `i / 64`; unused tail bits stay
/// zero so equality and hashing are plain word comparisons. Networks up to
/// 64 nodes fit inline without heap allocation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NetworkState {
    n: u32,
    words: SmallVec<[u64; 1]>,
}

impl NetworkState {
    /// All-false state over `n` nodes.
    pub fn zeros(n: usize) -> Self {
        let nw = n.div_ceil(64).max(1);
        NetworkState {
            n: n as u32,
            words: SmallVec::from_elem(0u64, nw),
        }
    }

    /// Build from a per-node predicate.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            if f(i) {
                s.set(i, true);
            }
        }
        s
    }

    /// Low `n` bits of `bits` as a state (requires `n <= 64`).
    pub fn from_u64(n: usize, bits: u64) -> Self {
        assert!(n <= 64);
        let mut s = Self::zeros(n);
        s.words[0] = if n == 64 {
            bits
        } else {
            bits & ((1u64 << n) - 1)
        };
        s
    }

    /// Uniformly random state.
    pub fn random(n: usize, rng: &mut RngStream) -> Self {
        let mut s = Self::zeros(n);
        for w in s.words.iter_mut() {
            *w = rng.next_u64();
        }
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let n = self.n as usize;
        if n % 64 != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << (n % 64)) - 1;
        }
        if n == 0 {
            self.words[0] = 0;
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n as usize);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.n as usize);
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1u64 << (i % 64);
        } else {
            *w &= !(1u64 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n as usize);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn as_words(&self) -> &[u64] {
        &self.words
    }

    /// Number of differing bits.
    pub fn hamming(&self, other: &NetworkState) -> u32 {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Hex encoding: byte `j` holds nodes `8j..8j+8` (node at bit `i % 8`),
    /// emitted lowest byte first, two lowercase digits per byte.
    pub fn to_hex(&self) -> String {
        let n = self.n as usize;
        let nb = n.div_ceil(8).max(1);
        let mut out = String::with_capacity(nb * 2);
        for j in 0..nb {
            let byte = (self.words[j / 8] >> ((j % 8) * 8)) as u8;
            out.push_str(&format!("{:02x}", byte));
        }
        out
    }

    /// Inverse of [`NetworkState::to_hex`] for an `n`-node state.
    pub fn from_hex(n: usize, s: &str) -> Result<Self, HexError> {
        let nb = n.div_ceil(8).max(1);
        if s.len() != nb * 2 {
            return Err(HexError::BadLength {
                expected: nb * 2,
                got: s.len(),
            });
        }
        let mut st = Self::zeros(n);
        for j in 0..nb {
            let byte = u8::from_str_radix(&s[2 * j..2 * j + 2], 16)
                .map_err(|_| HexError::BadDigit { position: 2 * j })?;
            st.words[j / 8] |= (byte as u64) << ((j % 8) * 8);
        }
        let mut masked = st.clone();
        masked.mask_tail();
        if masked.words != st.words {
            return Err(HexError::TailBitsSet);
        }
        Ok(masked)
    }
}

impl PartialOrd for NetworkState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NetworkState {
    /// Numeric order with node 0 as the least significant bit.
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for NetworkState {
    /// Bit string with node 0 leftmost, e.g. `011` for x1=0, x2=1, x3=1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n as usize {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NetworkState({})", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HexError {
    #[error("state hex has {got} characters, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("invalid hex digit at position {position}")]
    BadDigit { position: usize },
    #[error("hex encodes bits beyond the node count")]
    TailBitsSet,
}

/// Partial truth assignment over node indices: environmental conditions pin
/// input nodes, control targets constrain the goal attractor.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PartialAssignment {
    pairs: Vec<(usize, bool)>,
}

impl PartialAssignment {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from `(node, value)` pairs. Duplicate pairs collapse; the same
    /// node with both values is a conflict.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (usize, bool)>,
    ) -> Result<Self, AssignmentConflict> {
        let mut v: Vec<(usize, bool)> = pairs.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(AssignmentConflict { node: w[0].0 });
            }
        }
        Ok(PartialAssignment { pairs: v })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(i, _)| i)
    }

    /// The pinned value of `node`, if any.
    pub fn pin_of(&self, node: usize) -> Option<bool> {
        self.pairs
            .binary_search_by_key(&node, |&(i, _)| i)
            .ok()
            .map(|k| self.pairs[k].1)
    }

    /// True when every constrained node matches in `s`.
    pub fn matches(&self, s: &NetworkState) -> bool {
        self.pairs.iter().all(|&(i, v)| s.get(i) == v)
    }

    /// Overwrite constrained nodes in `s`.
    pub fn force(&self, s: &mut NetworkState) {
        for &(i, v) in &self.pairs {
            s.set(i, v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("node index {node} assigned both 0 and 1")]
pub struct AssignmentConflict {
    pub node: usize,
}
