//! The trait language: syntax tree, surface syntax, unification and
//! printing.

pub mod ast;
pub mod lexer;
pub mod parse;
pub mod print;
pub mod unify;
pub mod wf;

pub use ast::*;
pub use parse::{parse_context, ParseError, ParseErrorKind};
pub use print::{pretty_print, render_context, PrettyPrint, PrintMode};
pub use unify::{
    alpha_equivalent, apply_subst, canonicalize, unify, unify_instances, unify_lists, Substitute, Substitution, UnifyFailure,
};
pub use wf::{check_well_formed, Diagnostic};
