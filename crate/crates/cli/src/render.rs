//! Plain-text rendering of inference trees.

use std::fmt::Write as _;

use traitscope::engine::{ImplRef, NodeId, NodeKind, ProofTree, Reason, ResultValue};
use traitscope::lang::{pretty_print, Context, PrintMode};
use traitscope::report::impl_head;

pub fn glyph(value: ResultValue) -> char {
    match value {
        ResultValue::Yes => '✓',
        ResultValue::No => '✗',
        ResultValue::Maybe => '?',
    }
}

/// One line per node, indented by nesting: goals show their predicate,
/// candidates the impl head or built-in rule that was tried.
pub fn render_tree(tree: &ProofTree, ctx: &Context) -> String {
    let mut out = String::new();
    line(tree, ctx, tree.root(), 0, &mut out);
    out
}

fn line(tree: &ProofTree, ctx: &Context, id: NodeId, indent: usize, out: &mut String) {
    let node = tree.node(id);
    let text = match &node.kind {
        NodeKind::Goal { predicate, .. } => pretty_print(predicate, PrintMode::Shortened, ctx),
        NodeKind::Candidate {
            impl_ref: ImplRef::Impl(imp),
            ..
        } => ctx
            .impl_decl(*imp)
            .map_or_else(|| format!("impl #{}", imp.0), |(i, _)| impl_head(ctx, i, PrintMode::Shortened)),
        NodeKind::Candidate {
            impl_ref: ImplRef::BuiltIn(b),
            ..
        } => format!("built-in {}", b.as_str()),
    };
    let _ = write!(out, "{:indent$}{} {id} {text}", "", glyph(node.result.value));
    match &node.result.reason {
        Reason::None => {}
        Reason::Ambiguous { vars } => {
            let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
            let _ = write!(out, "  [ambiguous: {}]", vars.join(", "));
        }
        Reason::Overflow { cycle_path } => {
            let path: Vec<String> = cycle_path.iter().map(|n| n.to_string()).collect();
            let _ = write!(out, "  [overflow: {}]", path.join(" -> "));
        }
        Reason::NoCandidates => out.push_str("  [no candidates]"),
        Reason::TypeMismatch { expected, found } => {
            let _ = write!(
                out,
                "  [expected {}, found {}]",
                pretty_print(expected, PrintMode::Shortened, ctx),
                pretty_print(found, PrintMode::Shortened, ctx)
            );
        }
    }
    if node.is_stale() {
        out.push_str("  (superseded)");
    }
    out.push('\n');
    for c in &node.children {
        line(tree, ctx, *c, indent + 2, out);
    }
}
