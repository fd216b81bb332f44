use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::{ImplId, InferVar, Predicate, Substitution, Type};

/// Index of a node in a [`ProofTree`]. Ids are assigned in preorder, so a
/// parent's id is always smaller than its children's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResultValue {
    // Declaration order doubles as the truth order No < Maybe < Yes.
    No,
    Maybe,
    Yes,
}

impl ResultValue {
    pub fn as_str(self) -> &'static str {
        match self {
            ResultValue::Yes => "yes",
            ResultValue::No => "no",
            ResultValue::Maybe => "maybe",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    #[default]
    None,
    /// The listed inference variables are still unresolved.
    Ambiguous { vars: Vec<InferVar> },
    /// Goal ids from the first occurrence of a repeated predicate down to
    /// the node where the search was cut. A depth cut lists only itself.
    Overflow { cycle_path: Vec<NodeId> },
    NoCandidates,
    /// A normalized projection did not match the expected type.
    TypeMismatch { expected: Type, found: Type },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: ResultValue,
    pub reason: Reason,
}

impl EvalResult {
    pub fn yes() -> Self {
        EvalResult {
            value: ResultValue::Yes,
            reason: Reason::None,
        }
    }

    pub fn no(reason: Reason) -> Self {
        EvalResult {
            value: ResultValue::No,
            reason,
        }
    }

    pub fn maybe(reason: Reason) -> Self {
        EvalResult {
            value: ResultValue::Maybe,
            reason,
        }
    }

    pub fn is_yes(&self) -> bool {
        self.value == ResultValue::Yes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltIn {
    /// Region constraints are assumed to hold.
    OutlivesAssumed,
    /// `dyn p̄` implements the traits named in `p̄`.
    Existential,
    /// A function item or function type called with the trait's arity.
    Callable,
    /// Normalizes the projections in a trait bound, then solves the result.
    Normalize,
    /// Normalizes the left side of a projection equality and compares.
    NormalizesTo,
}

impl BuiltIn {
    pub fn as_str(self) -> &'static str {
        match self {
            BuiltIn::OutlivesAssumed => "outlives_assumed",
            BuiltIn::Existential => "existential",
            BuiltIn::Callable => "callable",
            BuiltIn::Normalize => "normalize",
            BuiltIn::NormalizesTo => "normalizes_to",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplRef {
    Impl(ImplId),
    BuiltIn(BuiltIn),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Goal {
        predicate: Predicate,
        /// An earlier evaluation superseded by a re-evaluation with more
        /// inference variables resolved. Only present when snapshots are
        /// kept; stale goals take no part in results or views.
        stale: bool,
    },
    Candidate {
        impl_ref: ImplRef,
        unifier: Substitution,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    /// Goal nesting depth; a candidate shares its goal's depth.
    pub depth: usize,
    pub result: EvalResult,
    pub children: Vec<NodeId>,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_goal(&self) -> bool {
        matches!(self.kind, NodeKind::Goal { .. })
    }

    pub fn predicate(&self) -> Option<&Predicate> {
        match &self.kind {
            NodeKind::Goal { predicate, .. } => Some(predicate),
            NodeKind::Candidate { .. } => None,
        }
    }

    pub fn is_stale(&self) -> bool {
        matches!(self.kind, NodeKind::Goal { stale: true, .. })
    }

    pub fn impl_ref(&self) -> Option<ImplRef> {
        match &self.kind {
            NodeKind::Candidate { impl_ref, .. } => Some(*impl_ref),
            NodeKind::Goal { .. } => None,
        }
    }
}

/// An And-Or inference tree: goals are disjunctions over their candidates,
/// candidates conjunctions over their subgoals. Node 0 is the root goal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTree {
    pub nodes: Vec<Node>,
}

impl ProofTree {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn result(&self) -> &EvalResult {
        &self.node(self.root()).result
    }

    pub fn predicate(&self, id: NodeId) -> Option<&Predicate> {
        self.get(id).and_then(Node::predicate)
    }

    /// Children that take part in evaluation (stale snapshots skipped).
    pub fn live_children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.node(id)
            .children
            .iter()
            .copied()
            .filter(move |c| !self.node(*c).is_stale())
    }

    /// Node ids from `id`'s parent up to the root, alternating candidate
    /// and goal.
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.node(id).parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.node(p).parent;
        }
        out
    }

    /// True when `id` is live: neither it nor any ancestor goal is stale.
    pub fn is_live(&self, id: NodeId) -> bool {
        !self.node(id).is_stale() && self.ancestors(id).iter().all(|a| !self.node(*a).is_stale())
    }
}
