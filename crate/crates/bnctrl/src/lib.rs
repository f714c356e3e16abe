//! Attractor-target control of asynchronous Boolean networks.
//!
//! The pipeline: parse a BoolNet model, restrict it under an environmental
//! condition, discover pseudo-attractor states by simulation (with an exact
//! fallback for small instances), then train a branching dueling Q-network
//! over a graph-convolutional encoding of the wiring to drive the system into
//! a target attractor with few gene flips. A brute-force oracle over the
//! explicit state transition graph provides ground truth for verification.
//!
//! Everything stochastic draws from named [`RngStream`]s derived from one
//! root seed, so every run is reproducible bit for bit.

pub mod agent;
pub mod bn;
pub mod config;
pub mod dynamics;
pub mod evaluation;
pub mod exact;
pub mod neural;
pub mod pasip;
pub mod rng;
#[doc(hidden)]
pub mod testsupport;

pub use bn::{BoolExpr, BooleanNetwork, NetworkState, ParseError, PartialAssignment};
pub use rng::RngStream;
