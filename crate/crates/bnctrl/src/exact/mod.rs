//! Ground truth for small instances: explicit state transition graphs,
//! bottom-SCC attractors, exact stationary distributions and pseudo-attractor
//! sets, basins, a brute-force minimal-control oracle, and the reference
//! average-control-path-length computation.
//!
//! Everything here is exhaustive and refuses instances whose free-node count
//! exceeds the explicit ceiling rather than approximating.

mod acpl;
mod attractors;
mod basins;
mod oracle;
mod stationary;
mod stg;

pub use acpl::{acpl_reference, AcplCondition, AcplError, AcplInputs};
pub use attractors::attractors_exact;
pub use basins::BasinMap;
pub use oracle::{min_control_oracle, BasinMode, ControlStep, OraclePlan};
pub use stationary::{
    pseudo_attractor_exact, solve_stationary, stationary_distribution, StationaryDistribution,
};
pub use stg::{ExplicitStg, DEFAULT_STATE_CAP};

use crate::bn::ModelError;

/// One attractor: a bottom strongly connected component of the STG.
/// `states` are STG indices, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attractor {
    pub states: Vec<u32>,
    pub fixed_point: bool,
}

impl Attractor {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, idx: u32) -> bool {
        self.states.binary_search(&idx).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExactError {
    #[error("explicit analysis refused: {free} free nodes gives {states} states, cap is {cap}")]
    TooLarge {
        free: usize,
        states: u128,
        cap: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("stationary solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("singular transition system: attractor chain is not irreducible")]
    SingularSystem,
}
