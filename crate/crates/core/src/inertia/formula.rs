use std::collections::BTreeSet;

use crate::engine::{NodeId, ProofTree};
use crate::views::is_failed_leaf;

/// The And-Or tree read as a propositional formula over its failed leaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(NodeId),
    True,
    False,
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// Conjunction with units dropped, nesting flattened and singletons
    /// collapsed.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn eval(&self, holds: &dyn Fn(NodeId) -> bool) -> bool {
        match self {
            Formula::Var(v) => holds(*v),
            Formula::True => true,
            Formula::False => false,
            Formula::And(fs) => fs.iter().all(|f| f.eval(holds)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(holds)),
        }
    }

    pub fn vars(&self) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<NodeId>) {
        match self {
            Formula::Var(v) => {
                out.insert(*v);
            }
            Formula::True | Formula::False => {}
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
        }
    }
}

/// Goals become disjunctions over their candidates and candidates
/// conjunctions over their subgoals; successful subtrees are `True` and
/// failed leaves are variables.
pub fn to_formula(tree: &ProofTree) -> Formula {
    if tree.is_empty() {
        return Formula::True;
    }
    goal(tree, tree.root())
}

fn goal(tree: &ProofTree, id: NodeId) -> Formula {
    if is_failed_leaf(tree, id) {
        return Formula::Var(id);
    }
    if tree.node(id).result.is_yes() {
        return Formula::True;
    }
    Formula::or(tree.live_children(id).map(|c| candidate(tree, c)))
}

fn candidate(tree: &ProofTree, id: NodeId) -> Formula {
    if tree.node(id).result.is_yes() {
        return Formula::True;
    }
    match Formula::and(tree.live_children(id).map(|g| goal(tree, g))) {
        // Failed for a reason none of its subgoals carries.
        Formula::True => Formula::False,
        f => f,
    }
}
