//! Strong and weak basins via reachable-attractor sets over the SCC
//! condensation.

use super::attractors::condensation;
use super::stg::ExplicitStg;
use super::Attractor;

/// For every state, the set of attractors reachable from it, stored as
/// per-component bitsets. A state's strong basin membership is "reaches
/// exactly one attractor"; weak basin is "reaches it at all".
pub struct BasinMap {
    comp: Vec<u32>,
    /// component id → attractor-set bitset, `words` u64s per component.
    masks: Vec<u64>,
    words: usize,
    n_attractors: usize,
}

impl BasinMap {
    pub fn build(stg: &ExplicitStg, attractors: &[Attractor]) -> BasinMap {
        let c = condensation(stg);
        let words = attractors.len().div_ceil(64).max(1);
        let mut masks = vec![0u64; c.n_comps * words];

        // Seed the components that are attractors.
        for (aid, a) in attractors.iter().enumerate() {
            let cid = c.comp[a.states[0] as usize] as usize;
            masks[cid * words + aid / 64] |= 1u64 << (aid % 64);
        }

        // Components are numbered so edges go from higher ids to lower ids;
        // group states by component, then sweep components in ascending order
        // folding in successor masks (already final).
        let mut counts = vec![0u32; c.n_comps + 1];
        for &cid in &c.comp {
            counts[cid as usize + 1] += 1;
        }
        for i in 0..c.n_comps {
            counts[i + 1] += counts[i];
        }
        let mut members = vec![0u32; stg.n_states()];
        let mut cursor = counts.clone();
        for v in 0..stg.n_states() as u32 {
            let cid = c.comp[v as usize] as usize;
            members[cursor[cid] as usize] = v;
            cursor[cid] += 1;
        }

        for cid in 0..c.n_comps {
            for mi in counts[cid]..counts[cid + 1] {
                let v = members[mi as usize];
                for &w in stg.successors(v) {
                    let cw = c.comp[w as usize] as usize;
                    if cw != cid {
                        for k in 0..words {
                            let bits = masks[cw * words + k];
                            masks[cid * words + k] |= bits;
                        }
                    }
                }
            }
        }

        BasinMap {
            comp: c.comp,
            masks,
            words,
            n_attractors: attractors.len(),
        }
    }

    pub fn n_attractors(&self) -> usize {
        self.n_attractors
    }

    fn mask_of(&self, state: u32) -> &[u64] {
        let cid = self.comp[state as usize] as usize;
        &self.masks[cid * self.words..(cid + 1) * self.words]
    }

    /// Attractor ids reachable from `state`, ascending.
    pub fn reachable_attractors(&self, state: u32) -> Vec<usize> {
        let mask = self.mask_of(state);
        let mut out = Vec::new();
        for (k, &w) in mask.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(k * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    /// The unique attractor reachable from `state`, if exactly one.
    pub fn sole_attractor(&self, state: u32) -> Option<usize> {
        let mask = self.mask_of(state);
        let total: u32 = mask.iter().map(|w| w.count_ones()).sum();
        if total == 1 {
            let k = mask.iter().position(|&w| w != 0).unwrap();
            Some(k * 64 + mask[k].trailing_zeros() as usize)
        } else {
            None
        }
    }

    pub fn can_reach(&self, state: u32, attractor: usize) -> bool {
        self.mask_of(state)[attractor / 64] >> (attractor % 64) & 1 == 1
    }

    /// States from which every path ends in `attractor` and no other
    /// attractor is reachable; ascending.
    pub fn strong_basin(&self, attractor: usize) -> Vec<u32> {
        (0..self.comp.len() as u32)
            .filter(|&s| self.sole_attractor(s) == Some(attractor))
            .collect()
    }

    /// States from which `attractor` is reachable; ascending.
    pub fn weak_basin(&self, attractor: usize) -> Vec<u32> {
        (0..self.comp.len() as u32)
            .filter(|&s| self.can_reach(s, attractor))
            .collect()
    }
}
