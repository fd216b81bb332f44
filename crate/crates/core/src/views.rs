//! Bottom-up and top-down views over an inference tree.
//!
//! Views hold node ids only; payloads stay in the tree so a client can
//! fetch them lazily as it unfolds.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::engine::{NodeId, ProofTree};
use crate::inertia::Ranking;

/// A goal is a failed leaf when it did not hold and nothing beneath it
/// explains why: no candidate has a failing subgoal, or one candidate
/// succeeded and the goal failed only through ambiguity. Cut goals are
/// leaves. Stale snapshots never are, and neither is anything inside a
/// subtree that holds anyway through another candidate.
pub fn is_failed_leaf(tree: &ProofTree, id: NodeId) -> bool {
    let node = tree.node(id);
    if !node.is_goal() || node.result.is_yes() || !tree.is_live(id) {
        return false;
    }
    if tree.ancestors(id).iter().any(|a| tree.node(*a).result.is_yes()) {
        return false;
    }
    let mut cands = tree.live_children(id);
    cands.all(|c| {
        tree.node(c).result.is_yes() || tree.live_children(c).all(|g| tree.node(g).result.is_yes())
    }) || tree.live_children(id).any(|c| tree.node(c).result.is_yes())
}

pub fn failed_leaves(tree: &ProofTree) -> BTreeSet<NodeId> {
    tree.nodes
        .iter()
        .map(|n| n.id)
        .filter(|id| is_failed_leaf(tree, *id))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BottomUpEntry {
    pub leaf: NodeId,
    /// From the leaf's parent candidate up to the root goal.
    pub ancestors: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BottomUpView {
    pub entries: Vec<BottomUpEntry>,
    pub ranking: Ranking,
}

/// One entry per ranked leaf, in ranking order, each with its full chain
/// of ancestors.
pub fn bottom_up(tree: &ProofTree, ranking: &Ranking) -> BottomUpView {
    let entries = ranking
        .entries
        .iter()
        .map(|e| BottomUpEntry {
            leaf: e.node,
            ancestors: tree.ancestors(e.node),
        })
        .collect();
    BottomUpView {
        entries,
        ranking: ranking.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibleFilter {
    FailuresOnly,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopDownView {
    pub root: NodeId,
    pub filter: VisibleFilter,
}

impl TopDownView {
    /// Nodes the view exposes, in id order. Under `FailuresOnly` these are
    /// the live nodes that did not hold, their ancestors and the root.
    pub fn visible(&self, tree: &ProofTree) -> Vec<NodeId> {
        match self.filter {
            VisibleFilter::All => tree.nodes.iter().map(|n| n.id).collect(),
            VisibleFilter::FailuresOnly => {
                let mut shown = BTreeSet::from([self.root]);
                for n in &tree.nodes {
                    if !n.result.is_yes() && tree.is_live(n.id) && shown.insert(n.id) {
                        shown.extend(tree.ancestors(n.id));
                    }
                }
                shown.into_iter().collect()
            }
        }
    }

    /// Children of `id` visible in this view.
    pub fn children(&self, tree: &ProofTree, id: NodeId) -> Vec<NodeId> {
        let node = tree.node(id);
        match self.filter {
            VisibleFilter::All => node.children.clone(),
            VisibleFilter::FailuresOnly => tree
                .live_children(id)
                .filter(|c| !tree.node(*c).result.is_yes())
                .collect(),
        }
    }
}

pub fn top_down(tree: &ProofTree, filter: VisibleFilter) -> TopDownView {
    TopDownView {
        root: tree.root(),
        filter,
    }
}
