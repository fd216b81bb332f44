//! Ranks failed leaves by how much code a fix would likely touch.
//!
//! The tree is read as a formula over its failed leaves and normalized to
//! DNF; each minimal conjunct is a correction set scored by the summed
//! weights of its members' [`GoalKind`]s.

mod dnf;
mod formula;
mod kind;
mod mcs;
mod rank;

pub use dnf::{dnf_normalize, Conjunct};
pub use formula::{to_formula, Formula};
pub use kind::{classify_goal, weight, GoalKind, Location};
pub use mcs::{minimum_correction_sets, CorrectionSet};
pub use rank::{rank, rank_inertia, Heuristic, RankEntry, Ranking};

#[cfg(test)]
mod tests;
