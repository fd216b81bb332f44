//! Command implementations behind the `traitscope` binary.
//!
//! Each command returns an [`Output`] rather than printing, so the binary
//! and the tests share one code path.

pub mod commands;
pub mod render;
pub mod server;

pub use commands::{check, compare, load, rank, solve_config, tree, Format, Output, RankHeuristic};
