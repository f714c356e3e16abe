//! Boolean network models: states, expressions, the BoolNet text format, and
//! the network type with essential-parent pruning.

mod expr;
mod network;
mod parse;
mod state;

pub use expr::BoolExpr;
pub use network::{essential_inputs, BooleanNetwork, ModelError, MAX_NODES};
pub use parse::{parse_bnet, ParseError};
pub use state::{AssignmentConflict, HexError, NetworkState, PartialAssignment};
