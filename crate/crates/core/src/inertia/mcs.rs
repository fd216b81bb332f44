use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::engine::NodeId;

use super::dnf::{absorb, Conjunct};

/// A minimal set of failed predicates whose truth makes the root hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionSet {
    pub predicates: BTreeSet<NodeId>,
    /// Sum of the members' weights.
    pub score: usize,
}

/// Subset-minimal conjuncts, scored and sorted by score then members.
pub fn minimum_correction_sets(conjuncts: &[Conjunct], weight: &dyn Fn(NodeId) -> usize) -> Vec<CorrectionSet> {
    let mut out: Vec<CorrectionSet> = absorb(conjuncts.to_vec())
        .into_iter()
        .map(|predicates| CorrectionSet {
            score: predicates.iter().map(|p| weight(*p)).sum(),
            predicates,
        })
        .collect();
    out.sort_by(|a, b| a.score.cmp(&b.score).then_with(|| a.predicates.cmp(&b.predicates)));
    out
}
