use serde::{Deserialize, Serialize};

use crate::lang::{Context, Predicate, Provenance, Type};

/// Where a symbol is defined; implementing a foreign trait for a foreign
/// type is ruled out by the orphan rule.
pub type Location = Provenance;

/// How a failed predicate would most plausibly be fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoalKind {
    /// Implement a trait for a nominal type.
    Trait { self_loc: Location, trait_loc: Location },
    /// Change a type so an associated type matches.
    TyChange,
    /// Implement a non-function trait for a function.
    FnToTrait { trait_loc: Location, arity: usize },
    /// Use a non-function type where a function is expected.
    TyAsCallable { arity: usize },
    DeleteFnParams { delta: usize },
    AddFnParams { delta: usize },
    /// A function of the right arity with the wrong parameter types.
    IncorrectParams { arity: usize },
    Misc,
}

impl GoalKind {
    pub fn weight(self) -> usize {
        use Provenance::{External as E, Local as L};
        match self {
            GoalKind::Trait {
                self_loc: L,
                trait_loc: L,
            } => 0,
            GoalKind::Trait {
                self_loc: L,
                trait_loc: E,
            }
            | GoalKind::Trait {
                self_loc: E,
                trait_loc: L,
            }
            | GoalKind::FnToTrait { trait_loc: L, .. } => 1,
            GoalKind::Trait {
                self_loc: E,
                trait_loc: E,
            } => 2,
            GoalKind::TyChange => 4,
            GoalKind::IncorrectParams { arity: delta }
            | GoalKind::AddFnParams { delta }
            | GoalKind::DeleteFnParams { delta } => 5 * delta,
            GoalKind::FnToTrait { trait_loc: E, arity } | GoalKind::TyAsCallable { arity } => 4 + 5 * arity,
            GoalKind::Misc => 50,
        }
    }
}

pub fn weight(kind: GoalKind) -> usize {
    kind.weight()
}

/// Classifies a failed predicate by the shape of its self type and the
/// trait it names. Anything that fits no rule is `Misc`.
pub fn classify_goal(predicate: &Predicate, ctx: &Context) -> GoalKind {
    let (self_ty, instance) = match predicate {
        Predicate::ProjectionEq { .. } => return GoalKind::TyChange,
        Predicate::Outlives { .. } => return GoalKind::Misc,
        Predicate::TraitBound { self_ty, instance } => (self_ty, instance),
    };
    let Some(trait_info) = ctx.symbol(instance.trait_id) else {
        return GoalKind::Misc;
    };
    let trait_loc = trait_info.provenance;
    let callable = ctx.trait_decl(instance.trait_id).and_then(|(t, _)| t.callable);
    let fn_arity = function_arity(self_ty, ctx);

    match (callable, fn_arity) {
        (Some(n), Some(a)) if a > n => GoalKind::DeleteFnParams { delta: a - n },
        (Some(n), Some(a)) if a < n => GoalKind::AddFnParams { delta: n - a },
        (Some(n), Some(_)) if n > 0 => GoalKind::IncorrectParams { arity: n },
        (Some(_), Some(_)) => GoalKind::Misc,
        (Some(n), None) => match location(self_ty, ctx) {
            Some(_) => GoalKind::TyAsCallable { arity: n },
            None => GoalKind::Misc,
        },
        (None, Some(arity)) => GoalKind::FnToTrait { trait_loc, arity },
        (None, None) => match location(self_ty, ctx) {
            Some(self_loc) => GoalKind::Trait { self_loc, trait_loc },
            None => GoalKind::Misc,
        },
    }
}

/// Surface arity of a function item or function type.
fn function_arity(ty: &Type, ctx: &Context) -> Option<usize> {
    match ty {
        Type::Ctor { head, args } if args.is_empty() => ctx.fn_item_arity(*head),
        Type::Function { arity, .. } => Some(*arity),
        _ => None,
    }
}

/// Location of a nominal type; built-in shapes count as external and
/// references take their referent's location.
fn location(ty: &Type, ctx: &Context) -> Option<Location> {
    match ty {
        Type::Ctor { head, .. } => ctx.symbol(*head).map(|s| s.provenance),
        Type::Unit | Type::Tuple { .. } => Some(Location::External),
        Type::Ref { inner, .. } => location(inner, ctx),
        _ => None,
    }
}
