//! Structural and semantic invariants of inference trees.

use crate::lang::{alpha_equivalent, Predicate};

use super::tree::*;

/// Checks a tree against the solver's invariants and returns every
/// violation found.
pub fn validate(tree: &ProofTree) -> Result<(), Vec<String>> {
    let mut errs = Vec::new();
    if tree.is_empty() {
        return Err(vec!["tree has no nodes".into()]);
    }
    for (i, node) in tree.nodes.iter().enumerate() {
        let id = node.id;
        if id.index() != i {
            errs.push(format!("node at index {i} has id {id}"));
            continue;
        }
        structure(tree, node, &mut errs);
        result_rules(tree, node, &mut errs);
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

fn structure(tree: &ProofTree, node: &Node, errs: &mut Vec<String>) {
    let id = node.id;
    match node.parent {
        None if id.0 != 0 => errs.push(format!("{id} has no parent")),
        None => {
            if !node.is_goal() {
                errs.push("root is not a goal".into());
            }
            if node.depth != 0 {
                errs.push(format!("root has depth {}", node.depth));
            }
        }
        Some(p) => match tree.get(p) {
            None => errs.push(format!("{id} has missing parent {p}")),
            Some(parent) => {
                if p >= id {
                    errs.push(format!("{id} is numbered before its parent {p}"));
                }
                if !parent.children.contains(&id) {
                    errs.push(format!("{p} does not list child {id}"));
                }
                if parent.is_goal() == node.is_goal() {
                    errs.push(format!("{p} and its child {id} are the same kind of node"));
                }
                let want = if node.is_goal() { parent.depth + 1 } else { parent.depth };
                if node.depth != want {
                    errs.push(format!("{id} has depth {}, expected {want}", node.depth));
                }
            }
        },
    }
    if node.children.windows(2).any(|w| w[0] >= w[1]) {
        errs.push(format!("children of {id} are not in increasing order"));
    }
    for c in &node.children {
        match tree.get(*c) {
            Some(child) if child.parent == Some(id) => {}
            _ => errs.push(format!("{id} lists {c}, which is not its child")),
        }
    }
    if node.is_stale() && node.parent.is_none_or(|p| tree.node(p).is_goal()) {
        errs.push(format!("stale goal {id} is not a subgoal of a candidate"));
    }
}

fn and_of(tree: &ProofTree, id: NodeId) -> ResultValue {
    tree.live_children(id)
        .map(|c| tree.node(c).result.value)
        .min()
        .unwrap_or(ResultValue::Yes)
}

fn result_rules(tree: &ProofTree, node: &Node, errs: &mut Vec<String>) {
    let id = node.id;
    let r = &node.result;
    if r.value == ResultValue::Yes && r.reason != Reason::None {
        errs.push(format!("{id} holds but carries a reason"));
    }
    if let Reason::Overflow { cycle_path } = &r.reason {
        if r.value != ResultValue::Maybe {
            errs.push(format!("{id} overflowed but is not maybe"));
        }
        cycle(tree, id, cycle_path, errs);
    }

    match &node.kind {
        NodeKind::Goal { predicate, .. } => {
            let values: Vec<ResultValue> = tree.live_children(id).map(|c| tree.node(c).result.value).collect();
            let best = values.iter().copied().max();
            match best {
                None => {
                    let cut = matches!(&r.reason, Reason::Overflow { cycle_path } if cycle_path.last() == Some(&id));
                    let ok = cut || r == &EvalResult::no(Reason::NoCandidates);
                    if !ok {
                        errs.push(format!("{id} has no candidates but is {:?}", r));
                    }
                }
                Some(ResultValue::Yes) => {
                    let ambiguous = r.value == ResultValue::Maybe && matches!(r.reason, Reason::Ambiguous { .. });
                    if r.value != ResultValue::Yes && !ambiguous {
                        errs.push(format!("{id} has a successful candidate but is {}", r.value.as_str()));
                    }
                    if r.value == ResultValue::Yes && predicate.has_infer_vars() {
                        errs.push(format!("{id} holds with unresolved inference variables"));
                    }
                }
                Some(v) if v != r.value => {
                    errs.push(format!("{id} is {}, its best candidate {}", r.value.as_str(), v.as_str()));
                }
                Some(_) => {}
            }
        }
        NodeKind::Candidate { impl_ref, .. } => {
            let and = and_of(tree, id);
            let normalizing = matches!(impl_ref, ImplRef::BuiltIn(BuiltIn::Normalize | BuiltIn::NormalizesTo));
            let ok = if normalizing { r.value <= and } else { r.value == and };
            if !ok {
                errs.push(format!(
                    "candidate {id} is {} but its subgoals give {}",
                    r.value.as_str(),
                    and.as_str()
                ));
            }
        }
    }
}

fn cycle(tree: &ProofTree, id: NodeId, path: &[NodeId], errs: &mut Vec<String>) {
    let preds: Option<Vec<&Predicate>> = path.iter().map(|n| tree.predicate(*n)).collect();
    let Some(preds) = preds else {
        errs.push(format!("cycle of {id} names a node that is not a goal"));
        return;
    };
    let (Some(first), Some(last)) = (preds.first(), preds.last()) else {
        errs.push(format!("cycle of {id} is empty"));
        return;
    };
    if !alpha_equivalent(first, last) {
        errs.push(format!("cycle of {id} does not close"));
    }
    for w in path.windows(2) {
        if !tree.ancestors(w[1]).contains(&w[0]) {
            errs.push(format!("cycle of {id}: {} is not an ancestor of {}", w[0], w[1]));
        }
    }
}
