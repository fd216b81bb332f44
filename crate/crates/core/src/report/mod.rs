//! Serialization of solved programs and the localization comparison.

mod compare;
mod document;

pub use compare::{
    compare_program, emulate_compiler_report, goal_distance, median, CompareError, ComparisonReport, GroundTruthMap,
    Method, ProgramReport,
};
pub use document::{
    analyze, analyze_goal, build_document, doc_node, impl_head, read_document, to_canonical_json, write_document,
    DocGoal, DocImpl, DocNode, DocNodeKind, DocPredicate, DocReason, DocTopDown, DocViews, DocumentError,
    GoalAnalysis, TreeDocument, TypeText, SCHEMA_VERSION,
};
