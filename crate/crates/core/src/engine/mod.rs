//! Goal evaluation and the inference trees it produces.

mod solve;
mod tree;
mod validate;

pub use solve::{assemble_candidates, evaluate_predicate_kind, normalize_projection, solve, SolveConfig};
pub use tree::*;
pub use validate::validate;

#[cfg(test)]
mod tests;
