//! Generators for randomized tests: small random networks with known
//! truth-table realizations. Not part of the public API surface.

use crate::bn::{BoolExpr, BooleanNetwork};
use crate::rng::RngStream;

/// A random predictor over `parents` realized as a sum of products of the
/// rows of a random truth table. Row bit j of `table` is the output when
/// parent j's literal pattern equals the row index bits.
pub fn expr_from_table(parents: &[usize], table: &[bool]) -> BoolExpr {
    let k = parents.len();
    assert_eq!(table.len(), 1 << k);
    let ones: Vec<usize> = (0..table.len()).filter(|&r| table[r]).collect();
    if ones.is_empty() {
        return BoolExpr::Const(false);
    }
    if ones.len() == table.len() {
        return BoolExpr::Const(true);
    }
    let mut sum: Option<BoolExpr> = None;
    for r in ones {
        let mut prod: Option<BoolExpr> = None;
        for (j, &p) in parents.iter().enumerate() {
            let lit = if (r >> j) & 1 == 1 {
                BoolExpr::Var(p)
            } else {
                BoolExpr::not(BoolExpr::Var(p))
            };
            prod = Some(match prod {
                None => lit,
                Some(e) => BoolExpr::and(e, lit),
            });
        }
        let prod = prod.unwrap();
        sum = Some(match sum {
            None => prod,
            Some(e) => BoolExpr::or(e, prod),
        });
    }
    sum.unwrap()
}

/// A random `n`-node network with per-node in-degree drawn from
/// `1..=max_parents` and uniformly random truth tables. Node names are
/// `v0..v{n-1}`. Parent sets may shrink under essential pruning when a random
/// table ignores a chosen parent.
pub fn random_network(n: usize, max_parents: usize, rng: &mut RngStream) -> BooleanNetwork {
    assert!(n >= 1);
    let max_parents = max_parents.min(n).max(1);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut predictors = Vec::with_capacity(n);
    for _ in 0..n {
        let d = 1 + rng.index(max_parents);
        let mut parents = Vec::with_capacity(d);
        while parents.len() < d {
            let p = rng.index(n);
            if !parents.contains(&p) {
                parents.push(p);
            }
        }
        parents.sort_unstable();
        let table: Vec<bool> = (0..1usize << d).map(|_| rng.chance(0.5)).collect();
        predictors.push(expr_from_table(&parents, &table));
    }
    BooleanNetwork::from_parts(names, predictors).expect("generated network is valid")
}

/// A random irreducible row-stochastic chain over `m` states: a full cycle
/// guarantees irreducibility, self-loops make it aperiodic, and a few extra
/// random edges vary the stationary mass. Row entries are (column, weight)
/// with positive weights summing to 1.
pub fn random_chain(m: usize, rng: &mut RngStream) -> Vec<Vec<(usize, f64)>> {
    assert!(m >= 1);
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<(usize, f64)> = vec![
            ((i + 1) % m, 0.05 + rng.unit()),
            (i, 0.05 + rng.unit()),
        ];
        let extras = rng.index(3);
        for _ in 0..extras {
            let j = rng.index(m);
            let w = 0.05 + rng.unit();
            match row.iter_mut().find(|(c, _)| *c == j) {
                Some((_, acc)) => *acc += w,
                None => row.push((j, w)),
            }
        }
        let total: f64 = row.iter().map(|&(_, w)| w).sum();
        for (_, w) in row.iter_mut() {
            *w /= total;
        }
        row.sort_by_key(|&(c, _)| c);
        rows.push(row);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::NetworkState;

    #[test]
    fn expr_realizes_table() {
        let parents = [0usize, 2];
        let table = [false, true, true, false];
        let e = expr_from_table(&parents, &table);
        for r in 0..4usize {
            let s = NetworkState::from_fn(3, |i| match i {
                0 => r & 1 == 1,
                2 => r & 2 == 2,
                _ => false,
            });
            assert_eq!(e.eval(&s), table[r], "row {r}");
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = random_network(8, 3, &mut RngStream::new(9, "gen"));
        let b = random_network(8, 3, &mut RngStream::new(9, "gen"));
        assert_eq!(a.serialize_bnet(), b.serialize_bnet());
    }
}
