//! The `TreeDocument` wire format (schema version 1).
//!
//! Documents are written with sorted keys, two-space indentation and a
//! trailing newline, so write → read → write is byte-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{solve, BuiltIn, ImplRef, NodeId, NodeKind, ProofTree, Reason, ResultValue, SolveConfig};
use crate::inertia::{rank, Heuristic, Ranking};
use crate::lang::{
    pretty_print, Context, GoalItem, ImplDecl, ImplId, InferVar, Predicate, PrintMode, Span, SymbolId, SymbolInfo,
    Type,
};
use crate::views::{bottom_up, top_down, BottomUpEntry, VisibleFilter};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub schema_version: String,
    pub symbols: BTreeMap<SymbolId, SymbolInfo>,
    pub goals: Vec<DocGoal>,
    /// Goal label → heuristic name → ranked leaf ids.
    pub rankings: BTreeMap<String, BTreeMap<String, Vec<NodeId>>>,
    pub views: BTreeMap<String, DocViews>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocGoal {
    pub label: String,
    pub root: NodeId,
    pub result: ResultValue,
    pub nodes: BTreeMap<NodeId, DocNode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocNodeKind {
    Goal,
    Candidate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocNode {
    pub kind: DocNodeKind,
    pub result: ResultValue,
    pub reason: DocReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<DocPredicate>,
    #[serde(rename = "impl", default, skip_serializing_if = "Option::is_none")]
    pub impl_info: Option<DocImpl>,
    pub children: Vec<NodeId>,
    pub depth: usize,
    pub parent: Option<NodeId>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub stale: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocPredicate {
    pub short: String,
    pub qualified: String,
    pub structured: Predicate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocImpl {
    pub id: Option<ImplId>,
    pub builtin: Option<BuiltIn>,
    pub head_short: String,
    pub head_qualified: String,
    pub span: Option<Span>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeText {
    pub short: String,
    pub qualified: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DocReason {
    None,
    Ambiguous { vars: Vec<InferVar> },
    Overflow { cycle_path: Vec<NodeId> },
    NoCandidates,
    TypeMismatch { expected: TypeText, found: TypeText },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocViews {
    pub bottom_up: Vec<BottomUpEntry>,
    pub top_down: DocTopDown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocTopDown {
    pub root: NodeId,
    pub filter: VisibleFilter,
    pub visible: Vec<NodeId>,
}

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0:?}, expected {SCHEMA_VERSION:?}")]
    Version(String),
}

/// A solved goal with its rankings under every heuristic.
#[derive(Clone, Debug)]
pub struct GoalAnalysis {
    pub label: String,
    pub tree: ProofTree,
    pub rankings: Vec<Ranking>,
}

impl GoalAnalysis {
    pub fn ranking(&self, heuristic: Heuristic) -> &Ranking {
        self.rankings
            .iter()
            .find(|r| r.heuristic == heuristic)
            .expect("every heuristic is ranked")
    }
}

pub fn analyze_goal(ctx: &Context, goal: &GoalItem, config: &SolveConfig) -> GoalAnalysis {
    let tree = solve(ctx, &goal.predicate, config);
    let rankings = Heuristic::ALL.iter().map(|h| rank(&tree, ctx, *h)).collect();
    GoalAnalysis {
        label: goal.label.clone(),
        tree,
        rankings,
    }
}

pub fn analyze(ctx: &Context, config: &SolveConfig) -> Vec<GoalAnalysis> {
    ctx.goals.iter().map(|g| analyze_goal(ctx, g, config)).collect()
}

pub fn build_document(ctx: &Context, analyses: &[GoalAnalysis]) -> TreeDocument {
    let mut rankings = BTreeMap::new();
    let mut views = BTreeMap::new();
    let goals = analyses
        .iter()
        .map(|a| {
            rankings.insert(
                a.label.clone(),
                a.rankings
                    .iter()
                    .map(|r| (r.heuristic.as_str().to_string(), r.nodes()))
                    .collect(),
            );
            let td = top_down(&a.tree, VisibleFilter::FailuresOnly);
            views.insert(
                a.label.clone(),
                DocViews {
                    bottom_up: bottom_up(&a.tree, a.ranking(Heuristic::Inertia)).entries,
                    top_down: DocTopDown {
                        root: td.root,
                        filter: td.filter,
                        visible: td.visible(&a.tree),
                    },
                },
            );
            DocGoal {
                label: a.label.clone(),
                root: a.tree.root(),
                result: a.tree.result().value,
                nodes: a.tree.nodes.iter().map(|n| (n.id, doc_node(ctx, n))).collect(),
            }
        })
        .collect();
    TreeDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        symbols: ctx.symbols.clone(),
        goals,
        rankings,
        views,
    }
}

pub fn doc_node(ctx: &Context, node: &crate::engine::Node) -> DocNode {
    let (kind, predicate, impl_info) = match &node.kind {
        NodeKind::Goal { predicate, .. } => (
            DocNodeKind::Goal,
            Some(DocPredicate {
                short: pretty_print(predicate, PrintMode::Shortened, ctx),
                qualified: pretty_print(predicate, PrintMode::FullyQualified, ctx),
                structured: predicate.clone(),
            }),
            None,
        ),
        NodeKind::Candidate { impl_ref, .. } => (DocNodeKind::Candidate, None, Some(doc_impl(ctx, *impl_ref))),
    };
    DocNode {
        kind,
        result: node.result.value,
        reason: doc_reason(ctx, &node.result.reason),
        predicate,
        impl_info,
        children: node.children.clone(),
        depth: node.depth,
        parent: node.parent,
        stale: node.is_stale(),
    }
}

fn doc_impl(ctx: &Context, impl_ref: ImplRef) -> DocImpl {
    match impl_ref {
        ImplRef::Impl(id) => {
            let found = ctx.impl_decl(id);
            DocImpl {
                id: Some(id),
                builtin: None,
                head_short: found.map_or_else(String::new, |(i, _)| impl_head(ctx, i, PrintMode::Shortened)),
                head_qualified: found.map_or_else(String::new, |(i, _)| impl_head(ctx, i, PrintMode::FullyQualified)),
                span: found.map(|(_, d)| d.span.clone()),
            }
        }
        ImplRef::BuiltIn(b) => DocImpl {
            id: None,
            builtin: Some(b),
            head_short: format!("built-in {}", b.as_str()),
            head_qualified: format!("built-in {}", b.as_str()),
            span: None,
        },
    }
}

/// `impl<T> Trait<..> for Self`, without where clauses.
pub fn impl_head(ctx: &Context, imp: &ImplDecl, mode: PrintMode) -> String {
    let binders = if imp.params.types.is_empty() {
        String::new()
    } else {
        format!("<{}>", imp.params.types.join(", "))
    };
    format!(
        "impl{binders} {} for {}",
        pretty_print(&imp.instance, mode, ctx),
        pretty_print(&imp.self_ty, mode, ctx)
    )
}

fn type_text(ctx: &Context, ty: &Type) -> TypeText {
    TypeText {
        short: pretty_print(ty, PrintMode::Shortened, ctx),
        qualified: pretty_print(ty, PrintMode::FullyQualified, ctx),
    }
}

fn doc_reason(ctx: &Context, reason: &Reason) -> DocReason {
    match reason {
        Reason::None => DocReason::None,
        Reason::Ambiguous { vars } => DocReason::Ambiguous { vars: vars.clone() },
        Reason::Overflow { cycle_path } => DocReason::Overflow {
            cycle_path: cycle_path.clone(),
        },
        Reason::NoCandidates => DocReason::NoCandidates,
        Reason::TypeMismatch { expected, found } => DocReason::TypeMismatch {
            expected: type_text(ctx, expected),
            found: type_text(ctx, found),
        },
    }
}

/// Canonical text: sorted keys, two-space indentation, trailing newline.
pub fn write_document(doc: &TreeDocument) -> String {
    to_canonical_json(doc)
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    // Going through `Value` sorts every object's keys.
    let value = serde_json::to_value(value).expect("documents serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values serialize");
    out.push('\n');
    out
}

pub fn read_document(text: &str) -> Result<TreeDocument, DocumentError> {
    let doc: TreeDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(DocumentError::Version(doc.schema_version));
    }
    Ok(doc)
}

impl TreeDocument {
    /// Every node id referenced from a goal's nodes, rankings or views,
    /// that does not exist in that goal's tree.
    pub fn dangling_references(&self) -> Vec<String> {
        let mut out = Vec::new();
        for goal in &self.goals {
            let mut check = |what: &str, id: NodeId| {
                if !goal.nodes.contains_key(&id) {
                    out.push(format!("{}: {what} refers to missing node {id}", goal.label));
                }
            };
            check("root", goal.root);
            for node in goal.nodes.values() {
                node.children.iter().for_each(|c| check("children", *c));
                if let Some(p) = node.parent {
                    check("parent", p);
                }
                if let DocReason::Overflow { cycle_path } = &node.reason {
                    cycle_path.iter().for_each(|c| check("cycle path", *c));
                }
            }
            for ids in self.rankings.get(&goal.label).into_iter().flat_map(|m| m.values()) {
                ids.iter().for_each(|c| check("ranking", *c));
            }
            if let Some(v) = self.views.get(&goal.label) {
                for e in &v.bottom_up {
                    check("bottom-up leaf", e.leaf);
                    e.ancestors.iter().for_each(|c| check("bottom-up chain", *c));
                }
                check("top-down root", v.top_down.root);
                v.top_down.visible.iter().for_each(|c| check("top-down", *c));
            }
        }
        out
    }
}
