use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{NodeId, ProofTree};
use crate::lang::Context;
use crate::views::failed_leaves;

use super::{classify_goal, dnf_normalize, minimum_correction_sets, to_formula, GoalKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    Inertia,
    Depth,
    InferVarCount,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::Inertia, Heuristic::Depth, Heuristic::InferVarCount];

    pub fn as_str(self) -> &'static str {
        match self {
            Heuristic::Inertia => "inertia",
            Heuristic::Depth => "depth",
            Heuristic::InferVarCount => "infer_vars",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub node: NodeId,
    pub key: usize,
}

/// Failed leaves in ascending key order, ties broken by node id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    pub heuristic: Heuristic,
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn nodes(&self) -> Vec<NodeId> {
        self.entries.iter().map(|e| e.node).collect()
    }

    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.entries.iter().position(|e| e.node == node)
    }
}

pub fn rank(tree: &ProofTree, ctx: &Context, heuristic: Heuristic) -> Ranking {
    match heuristic {
        Heuristic::Inertia => rank_inertia(tree, ctx, &GoalKind::weight),
        Heuristic::Depth => by_key(heuristic, tree, |id| tree.node(id).depth),
        Heuristic::InferVarCount => by_key(heuristic, tree, |id| {
            tree.predicate(id).map_or(0, |p| p.infer_vars().len())
        }),
    }
}

/// Inertia ranking under a custom weight table. Each leaf is keyed by the
/// cheapest correction set containing it; leaves in none sort after all
/// of them.
pub fn rank_inertia(tree: &ProofTree, ctx: &Context, weight: &dyn Fn(GoalKind) -> usize) -> Ranking {
    let weights: BTreeMap<NodeId, usize> = failed_leaves(tree)
        .into_iter()
        .map(|id| {
            let kind = tree.predicate(id).map_or(GoalKind::Misc, |p| classify_goal(p, ctx));
            (id, weight(kind))
        })
        .collect();
    let sets = minimum_correction_sets(&dnf_normalize(&to_formula(tree)), &|id| {
        weights.get(&id).copied().unwrap_or(0)
    });
    let mut best: BTreeMap<NodeId, usize> = BTreeMap::new();
    for set in &sets {
        for p in &set.predicates {
            let k = best.entry(*p).or_insert(set.score);
            *k = (*k).min(set.score);
        }
    }
    let unplaced = sets.iter().map(|s| s.score).max().unwrap_or(0) + 1;
    by_key(Heuristic::Inertia, tree, |id| best.get(&id).copied().unwrap_or(unplaced))
}

fn by_key(heuristic: Heuristic, tree: &ProofTree, key: impl Fn(NodeId) -> usize) -> Ranking {
    let mut entries: Vec<RankEntry> = failed_leaves(tree)
        .into_iter()
        .map(|node| RankEntry { node, key: key(node) })
        .collect();
    entries.sort_by_key(|e| (e.key, e.node));
    Ranking { heuristic, entries }
}
