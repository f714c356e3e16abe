//! Exact stationary distributions of attractor-restricted chains and the
//! exact pseudo-attractor set derived from them.

use super::stg::ExplicitStg;
use super::{Attractor, ExactError};

/// Attractor sizes up to this use a direct linear solve; larger ones fall
/// back to power iteration on the lazy chain.
const DENSE_LIMIT: usize = 4096;

/// Power-iteration convergence target, L1 residual of pi P - pi.
const POWER_RESIDUAL: f64 = 1e-12;

const POWER_ITER_CAP: usize = 2_000_000;

/// Slack for thresholds compared against exact rationals.
const THRESHOLD_EPS: f64 = 1e-9;

/// Stationary probabilities over the states of one attractor. `states` are
/// STG indices ascending, aligned with `probs`.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    states: Vec<u32>,
    probs: Vec<f64>,
}

impl StationaryDistribution {
    /// Assemble from parallel vectors; probabilities must be positive and sum
    /// to 1 within 1e-9.
    pub fn from_parts(states: Vec<u32>, probs: Vec<f64>) -> Self {
        assert_eq!(states.len(), probs.len());
        debug_assert!(probs.iter().all(|&p| p > 0.0));
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        StationaryDistribution { states, probs }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, state: u32) -> Option<f64> {
        self.states
            .binary_search(&state)
            .ok()
            .map(|i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.states.iter().copied().zip(self.probs.iter().copied())
    }

    /// States with probability at least `k_percent`/100 (within tolerance).
    pub fn states_at_threshold(&self, k_percent: u32) -> Vec<u32> {
        let thr = k_percent as f64 / 100.0 - THRESHOLD_EPS;
        self.iter()
            .filter(|&(_, p)| p >= thr)
            .map(|(s, _)| s)
            .collect()
    }
}

/// Solve pi P = pi, sum(pi) = 1 for a row-stochastic `rows` (row i lists
/// (column, probability) with positive entries summing to 1) describing an
/// irreducible chain. Direct solve for small systems, lazy power iteration
/// beyond [`DENSE_LIMIT`].
pub fn solve_stationary(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>, ExactError> {
    let m = rows.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    if m == 1 {
        return Ok(vec![1.0]);
    }
    if m <= DENSE_LIMIT {
        solve_dense(rows)
    } else {
        solve_power(rows)
    }
}

/// Gaussian elimination with partial pivoting on (P^T - I) with the last row
/// replaced by the normalization constraint.
fn solve_dense(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>, ExactError> {
    let m = rows.len();
    let mut a = vec![0.0f64; m * m];
    for (i, row) in rows.iter().enumerate() {
        for &(j, p) in row {
            a[j * m + i] += p; // transpose
        }
    }
    for i in 0..m {
        a[i * m + i] -= 1.0;
    }
    for j in 0..m {
        a[(m - 1) * m + j] = 1.0;
    }
    let mut b = vec![0.0f64; m];
    b[m - 1] = 1.0;

    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&r1, &r2| {
                a[r1 * m + col]
                    .abs()
                    .total_cmp(&a[r2 * m + col].abs())
            })
            .unwrap();
        if a[pivot_row * m + col].abs() < 1e-14 {
            return Err(ExactError::SingularSystem);
        }
        if pivot_row != col {
            for j in 0..m {
                a.swap(col * m + j, pivot_row * m + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * m + col];
        for r in col + 1..m {
            let factor = a[r * m + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[r * m + col] = 0.0;
            for j in col + 1..m {
                a[r * m + j] -= factor * a[col * m + j];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; m];
    for r in (0..m).rev() {
        let mut acc = b[r];
        for j in r + 1..m {
            acc -= a[r * m + j] * x[j];
        }
        x[r] = acc / a[r * m + r];
    }
    normalize(&mut x)?;
    Ok(x)
}

/// Power iteration on the lazy chain (I + P)/2, which converges for any
/// irreducible P; the residual is checked against the true P.
fn solve_power(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>, ExactError> {
    let m = rows.len();
    let mut pi = vec![1.0 / m as f64; m];
    let mut next = vec![0.0f64; m];
    for it in 0..POWER_ITER_CAP {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, row) in rows.iter().enumerate() {
            let w = pi[i];
            for &(j, p) in row {
                next[j] += w * p;
            }
        }
        let residual: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        for (p, n) in pi.iter_mut().zip(&next) {
            *p = 0.5 * *p + 0.5 * n;
        }
        if residual <= POWER_RESIDUAL {
            normalize(&mut pi)?;
            return Ok(pi);
        }
        if it == POWER_ITER_CAP - 1 {
            return Err(ExactError::NonConvergence {
                iterations: POWER_ITER_CAP,
                residual,
            });
        }
    }
    unreachable!()
}

fn normalize(pi: &mut [f64]) -> Result<(), ExactError> {
    let sum: f64 = pi.iter().sum();
    if !(sum.is_finite() && sum > 0.0) {
        return Err(ExactError::SingularSystem);
    }
    for p in pi.iter_mut() {
        *p /= sum;
        if !(*p > 0.0) {
            return Err(ExactError::SingularSystem);
        }
    }
    Ok(())
}

/// Stationary distribution of the chain restricted to one attractor, with
/// uniform node-choice transition probabilities (stutter mass included).
pub fn stationary_distribution(
    stg: &ExplicitStg,
    attractor: &Attractor,
) -> Result<StationaryDistribution, ExactError> {
    let n = stg.network().n_nodes() as f64;
    let local = |g: u32| -> usize {
        attractor
            .states
            .binary_search(&g)
            .expect("attractor closed under successors")
    };
    let rows: Vec<Vec<(usize, f64)>> = attractor
        .states
        .iter()
        .map(|&s| {
            stg.transition_counts(s)
                .into_iter()
                .map(|(t, c)| (local(t), c as f64 / n))
                .collect()
        })
        .collect();
    let probs = solve_stationary(&rows)?;
    Ok(StationaryDistribution {
        states: attractor.states.clone(),
        probs,
    })
}

/// The exact pseudo-attractor: states with stationary probability at least
/// 1/|A| (within tolerance). Never empty for a valid distribution.
pub fn pseudo_attractor_exact(dist: &StationaryDistribution) -> Vec<u32> {
    let thr = 1.0 / dist.len() as f64 - THRESHOLD_EPS;
    dist.iter()
        .filter(|&(_, p)| p >= thr)
        .map(|(s, _)| s)
        .collect()
}
