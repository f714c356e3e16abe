//! Brute-force minimal control strategies over the attractor meta-graph.

use super::basins::BasinMap;
use super::stg::ExplicitStg;
use super::Attractor;
use crate::bn::PartialAssignment;

/// Which basin admits a meta-edge: `Strong` requires guaranteed arrival in
/// the destination attractor, `Weak` only a possible path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasinMode {
    Strong,
    Weak,
}

/// One intervention of a control strategy: in `from_state` (a member of
/// `from_attractor`) flip `flips` (original node indices), after which the
/// dynamics settle in `to_attractor`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlStep {
    pub from_attractor: usize,
    pub from_state: u32,
    pub flips: Vec<usize>,
    pub to_attractor: usize,
}

/// A shortest control strategy: `length` interventions ending in an
/// attractor aligned with the target assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OraclePlan {
    pub length: usize,
    pub steps: Vec<ControlStep>,
    pub final_attractor: usize,
}

/// Yields flip subsets of `items` with sizes 1..=max_size, ordered by size
/// then lexicographically by item position.
struct Combinations<'a> {
    items: &'a [usize],
    size: usize,
    max_size: usize,
    idx: Vec<usize>,
    fresh: bool,
}

impl<'a> Combinations<'a> {
    fn new(items: &'a [usize], max_size: usize) -> Self {
        let max_size = max_size.min(items.len());
        Combinations {
            items,
            size: 1,
            max_size,
            idx: vec![0],
            fresh: true,
        }
    }
}

impl<'a> Iterator for Combinations<'a> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.items.is_empty() || self.max_size == 0 {
            return None;
        }
        loop {
            if self.fresh {
                self.fresh = false;
                return Some(self.idx.iter().map(|&i| self.items[i]).collect());
            }
            // advance the rightmost index that can still move
            let k = self.size;
            let n = self.items.len();
            let mut j = k;
            while j > 0 {
                j -= 1;
                if self.idx[j] + 1 <= n - (k - j) {
                    self.idx[j] += 1;
                    for l in j + 1..k {
                        self.idx[l] = self.idx[l - 1] + 1;
                    }
                    return Some(self.idx.iter().map(|&i| self.items[i]).collect());
                }
            }
            // exhausted this size
            if self.size >= self.max_size {
                return None;
            }
            self.size += 1;
            self.idx = (0..self.size).collect();
            self.fresh = true;
        }
    }
}

/// Shortest attractor-target control strategy from `source` (an index into
/// `attractors`). Interventions may be applied in any state of the current
/// attractor and may flip any free node except those pinned by `target`; an
/// intervention leads to attractor B when the perturbed state lies in B's
/// strong basin (or weak basin under [`BasinMode::Weak`]). Returns the
/// shortest plan to any attractor containing a state aligned with `target`,
/// or `None` when no such attractor is reachable.
pub fn min_control_oracle(
    stg: &ExplicitStg,
    attractors: &[Attractor],
    basins: &BasinMap,
    source: usize,
    target: &PartialAssignment,
    max_flips: usize,
    mode: BasinMode,
) -> Option<OraclePlan> {
    assert!(max_flips >= 1);
    let aligned: Vec<bool> = attractors
        .iter()
        .map(|a| a.states.iter().any(|&s| target.matches(&stg.unpack(s))))
        .collect();
    if aligned[source] {
        return Some(OraclePlan {
            length: 0,
            steps: Vec::new(),
            final_attractor: source,
        });
    }

    // Free-node positions that may be flipped: everything except
    // target-pinned nodes (env-pinned nodes are not free to begin with).
    let allowed: Vec<usize> = stg
        .free()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| target.pin_of(v).is_none())
        .map(|(j, _)| j)
        .collect();

    let mut dist: Vec<Option<usize>> = vec![None; attractors.len()];
    let mut prev: Vec<Option<ControlStep>> = vec![None; attractors.len()];
    dist[source] = Some(0);
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(source);

    let reconstruct = |end: usize, prev: &[Option<ControlStep>], dist: &[Option<usize>]| {
        let mut steps = Vec::new();
        let mut cur = end;
        while let Some(step) = &prev[cur] {
            cur = step.from_attractor;
            steps.push(step.clone());
        }
        steps.reverse();
        OraclePlan {
            length: dist[end].unwrap(),
            steps,
            final_attractor: end,
        }
    };

    while let Some(a) = queue.pop_front() {
        let d = dist[a].unwrap();
        for &s in &attractors[a].states {
            for flips in Combinations::new(&allowed, max_flips) {
                let mut t = s;
                for &j in &flips {
                    t ^= 1u32 << j;
                }
                let dests: Vec<usize> = match mode {
                    BasinMode::Strong => basins.sole_attractor(t).into_iter().collect(),
                    BasinMode::Weak => basins.reachable_attractors(t),
                };
                for b in dests {
                    if dist[b].is_some() {
                        continue;
                    }
                    dist[b] = Some(d + 1);
                    prev[b] = Some(ControlStep {
                        from_attractor: a,
                        from_state: s,
                        flips: flips.iter().map(|&j| stg.free()[j]).collect(),
                        to_attractor: b,
                    });
                    if aligned[b] {
                        return Some(reconstruct(b, &prev, &dist));
                    }
                    queue.push_back(b);
                }
            }
        }
    }
    None
}
