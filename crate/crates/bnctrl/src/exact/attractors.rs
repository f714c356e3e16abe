//! Attractors as bottom SCCs of the explicit graph, via iterative Tarjan.

use super::stg::ExplicitStg;
use super::Attractor;

const UNVISITED: u32 = u32::MAX;

/// SCC condensation. Component ids are assigned in completion order, so
/// every cross-component edge goes from a higher id to a lower id; component
/// 0 is always a bottom SCC.
pub(super) struct Condensation {
    pub comp: Vec<u32>,
    pub n_comps: usize,
}

pub(super) fn condensation(stg: &ExplicitStg) -> Condensation {
    let n = stg.n_states();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0u32; n];
    let mut comp = vec![UNVISITED; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, u32)> = Vec::new();
    let mut next_index = 0u32;
    let mut n_comps = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(frame) = call.last_mut() {
            let v = frame.0 as usize;
            if frame.1 == 0 {
                index[v] = next_index;
                lowlink[v] = next_index;
                next_index += 1;
                stack.push(frame.0);
                on_stack[v] = true;
            }
            let succ = stg.successors(frame.0);
            if (frame.1 as usize) < succ.len() {
                let w = succ[frame.1 as usize];
                frame.1 += 1;
                if index[w as usize] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    lowlink[v] = lowlink[v].min(index[w as usize]);
                }
            } else {
                let low = lowlink[v];
                let idx = index[v];
                call.pop();
                if let Some(parent) = call.last() {
                    let p = parent.0 as usize;
                    lowlink[p] = lowlink[p].min(low);
                }
                if low == idx {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp[w as usize] = n_comps;
                        if w as usize == v {
                            break;
                        }
                    }
                    n_comps += 1;
                }
            }
        }
    }

    Condensation {
        comp,
        n_comps: n_comps as usize,
    }
}

/// All attractors of the graph: bottom SCCs, each with states ascending, the
/// list sorted by smallest member state.
pub fn attractors_exact(stg: &ExplicitStg) -> Vec<Attractor> {
    let c = condensation(stg);
    let mut bottom = vec![true; c.n_comps];
    for v in 0..stg.n_states() as u32 {
        let cv = c.comp[v as usize];
        for &w in stg.successors(v) {
            if c.comp[w as usize] != cv {
                bottom[cv as usize] = false;
            }
        }
    }
    let mut states_of: Vec<Vec<u32>> = vec![Vec::new(); c.n_comps];
    for v in 0..stg.n_states() as u32 {
        let cv = c.comp[v as usize] as usize;
        if bottom[cv] {
            states_of[cv].push(v);
        }
    }
    let mut out: Vec<Attractor> = states_of
        .into_iter()
        .enumerate()
        .filter(|(cid, states)| bottom[*cid] && !states.is_empty())
        .map(|(_, mut states)| {
            states.sort_unstable();
            let fixed_point = states.len() == 1;
            Attractor {
                states,
                fixed_point,
            }
        })
        .collect();
    out.sort_by_key(|a| a.states[0]);
    out
}
