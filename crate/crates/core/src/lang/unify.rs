//! First-order unification over inference variables.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{InferVar, Predicate, Projection, TraitInstance, Type};

/// Bindings from inference variables to types. Kept idempotent: no bound
/// variable occurs in any binding's right-hand side.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Substitution(BTreeMap<InferVar, Type>);

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn get(&self, var: InferVar) -> Option<&Type> {
        self.0.get(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&InferVar, &Type)> {
        self.0.iter()
    }

    pub fn contains(&self, var: InferVar) -> bool {
        self.0.contains_key(&var)
    }

    /// Adds `var ↦ ty`, rewriting existing bindings so the result stays
    /// idempotent. `ty` must already be fully substituted and must not
    /// mention `var`.
    fn bind(&mut self, var: InferVar, ty: Type) {
        let single = Substitution(BTreeMap::from([(var, ty.clone())]));
        for value in self.0.values_mut() {
            *value = value.apply(&single);
        }
        self.0.insert(var, ty);
    }

    /// Extends `self` with `other`'s bindings (both applied to each other).
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = self.clone();
        for (var, ty) in other.iter() {
            let ty = ty.apply(&out);
            match out.get(*var).cloned() {
                Some(existing) => {
                    // Already bound: fold the two views together when they
                    // agree; a conflicting binding keeps the existing one.
                    if let Ok(merged) = unify(&existing, &ty, &out) {
                        out = merged;
                    }
                }
                None => {
                    if !occurs(*var, &ty) {
                        out.bind(*var, ty);
                    }
                }
            }
        }
        out
    }

    /// Bindings for `vars` only, fully applied.
    pub fn restrict(&self, vars: &[InferVar]) -> Substitution {
        let mut out = Substitution::new();
        for v in vars {
            if let Some(ty) = self.0.get(v) {
                out.0.insert(*v, ty.apply(self));
            }
        }
        out
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (InferVar, Type)>) -> Self {
        let mut out = Substitution::new();
        for (var, ty) in pairs {
            let ty = ty.apply(&out);
            out.bind(var, ty);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UnifyFailure {
    #[error("constructor mismatch between {left:?} and {right:?}")]
    ConstructorMismatch { left: Box<Type>, right: Box<Type> },
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("occurs check: {var} occurs in {ty:?}")]
    OccursCheck { var: InferVar, ty: Box<Type> },
}

/// Replacement of inference variables by a [`Substitution`].
pub trait Substitute {
    fn apply(&self, subst: &Substitution) -> Self;
}

impl Substitute for Type {
    fn apply(&self, s: &Substitution) -> Type {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Type::Infer { var } => match s.get(*var) {
                // Follow chains in case the substitution is not idempotent.
                Some(bound) => bound.apply(s),
                None => self.clone(),
            },
            Type::Unit | Type::Param { .. } => self.clone(),
            Type::Ref {
                region,
                mutable,
                inner,
            } => Type::Ref {
                region: region.clone(),
                mutable: *mutable,
                inner: Box::new(inner.apply(s)),
            },
            Type::Ctor { head, args } => Type::Ctor {
                head: *head,
                args: args.iter().map(|a| a.apply(s)).collect(),
            },
            Type::Tuple { left, right } => Type::Tuple {
                left: Box::new(left.apply(s)),
                right: Box::new(right.apply(s)),
            },
            Type::Function {
                param,
                result,
                arity,
            } => Type::Function {
                param: Box::new(param.apply(s)),
                result: Box::new(result.apply(s)),
                arity: *arity,
            },
            Type::Projection(p) => Type::Projection(Box::new(p.apply(s))),
            Type::Existential { binder, bounds } => Type::Existential {
                binder: binder.clone(),
                bounds: bounds.iter().map(|b| b.apply(s)).collect(),
            },
        }
    }
}

impl Substitute for TraitInstance {
    fn apply(&self, s: &Substitution) -> Self {
        TraitInstance {
            trait_id: self.trait_id,
            type_args: self.type_args.iter().map(|t| t.apply(s)).collect(),
            region_args: self.region_args.clone(),
        }
    }
}

impl Substitute for Projection {
    fn apply(&self, s: &Substitution) -> Self {
        Projection {
            self_ty: self.self_ty.apply(s),
            assoc: self.assoc,
            instance: self.instance.apply(s),
            type_args: self.type_args.iter().map(|t| t.apply(s)).collect(),
            region_args: self.region_args.clone(),
        }
    }
}

impl Substitute for Predicate {
    fn apply(&self, s: &Substitution) -> Self {
        match self {
            Predicate::TraitBound { self_ty, instance } => Predicate::TraitBound {
                self_ty: self_ty.apply(s),
                instance: instance.apply(s),
            },
            Predicate::Outlives { self_ty, region } => Predicate::Outlives {
                self_ty: self_ty.apply(s),
                region: region.clone(),
            },
            Predicate::ProjectionEq { projection, rhs } => Predicate::ProjectionEq {
                projection: projection.apply(s),
                rhs: rhs.apply(s),
            },
        }
    }
}

/// Applies `subst` to a type or predicate.
pub fn apply_subst<T: Substitute>(target: &T, subst: &Substitution) -> T {
    target.apply(subst)
}

fn occurs(var: InferVar, ty: &Type) -> bool {
    let mut found = false;
    ty.visit(&mut |t| {
        if matches!(t, Type::Infer { var: v } if *v == var) {
            found = true;
        }
    });
    found
}

/// Most general unifier of `left` and `right` extending `subst`.
///
/// Regions never constrain unification. Projections and existentials only
/// unify with structurally identical terms; normalization is the engine's
/// job.
pub fn unify(left: &Type, right: &Type, subst: &Substitution) -> Result<Substitution, UnifyFailure> {
    let mut s = subst.clone();
    unify_into(left, right, &mut s)?;
    Ok(s)
}

/// Unifies the argument lists of two instances of the same trait.
pub fn unify_instances(
    left: &TraitInstance,
    right: &TraitInstance,
    subst: &Substitution,
) -> Result<Substitution, UnifyFailure> {
    if left.trait_id != right.trait_id {
        return Err(UnifyFailure::ConstructorMismatch {
            left: Box::new(Type::Unit),
            right: Box::new(Type::Unit),
        });
    }
    unify_lists(&left.type_args, &right.type_args, subst)
}

pub fn unify_lists(left: &[Type], right: &[Type], subst: &Substitution) -> Result<Substitution, UnifyFailure> {
    if left.len() != right.len() {
        return Err(UnifyFailure::ArityMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    let mut s = subst.clone();
    for (a, b) in left.iter().zip(right) {
        unify_into(a, b, &mut s)?;
    }
    Ok(s)
}

fn unify_into(left: &Type, right: &Type, s: &mut Substitution) -> Result<(), UnifyFailure> {
    let a = left.apply(s);
    let b = right.apply(s);
    match (&a, &b) {
        (Type::Infer { var: x }, Type::Infer { var: y }) if x == y => Ok(()),
        (Type::Infer { var }, other) | (other, Type::Infer { var }) => {
            if occurs(*var, other) {
                return Err(UnifyFailure::OccursCheck {
                    var: *var,
                    ty: Box::new(other.clone()),
                });
            }
            s.bind(*var, other.clone());
            Ok(())
        }
        (Type::Unit, Type::Unit) => Ok(()),
        (Type::Param { name: x }, Type::Param { name: y }) if x == y => Ok(()),
        (
            Type::Ref {
                mutable: m1,
                inner: i1,
                ..
            },
            Type::Ref {
                mutable: m2,
                inner: i2,
                ..
            },
        ) if m1 == m2 => unify_into(i1, i2, s),
        (Type::Ctor { head: h1, args: a1 }, Type::Ctor { head: h2, args: a2 }) if h1 == h2 => {
            if a1.len() != a2.len() {
                return Err(UnifyFailure::ArityMismatch {
                    left: a1.len(),
                    right: a2.len(),
                });
            }
            for (x, y) in a1.iter().zip(a2) {
                unify_into(x, y, s)?;
            }
            Ok(())
        }
        (Type::Tuple { left: l1, right: r1 }, Type::Tuple { left: l2, right: r2 }) => {
            unify_into(l1, l2, s)?;
            unify_into(r1, r2, s)
        }
        (
            Type::Function {
                param: p1,
                result: r1,
                arity: n1,
            },
            Type::Function {
                param: p2,
                result: r2,
                arity: n2,
            },
        ) => {
            if n1 != n2 {
                return Err(UnifyFailure::ArityMismatch {
                    left: *n1,
                    right: *n2,
                });
            }
            unify_into(p1, p2, s)?;
            unify_into(r1, r2, s)
        }
        (Type::Projection(p), Type::Projection(q)) if p == q => Ok(()),
        (Type::Existential { .. }, Type::Existential { .. }) if a == b => Ok(()),
        _ => Err(UnifyFailure::ConstructorMismatch {
            left: Box::new(a.clone()),
            right: Box::new(b.clone()),
        }),
    }
}

/// Renames inference variables to `?0, ?1, ..` in order of first
/// occurrence. Two predicates are alpha-equivalent iff their canonical
/// forms are equal.
pub fn canonicalize(pred: &Predicate) -> Predicate {
    let vars = pred.infer_vars();
    if vars.is_empty() {
        return pred.clone();
    }
    let renaming: HashMap<InferVar, u32> = vars.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
    // Renaming through an intermediate range keeps source and target
    // indices from colliding.
    let offset = vars.iter().map(|v| v.0).max().unwrap_or(0) + 1;
    let to_tmp = Substitution(
        renaming
            .iter()
            .map(|(v, i)| (*v, Type::infer(offset + i)))
            .collect(),
    );
    let from_tmp = Substitution(
        renaming
            .values()
            .map(|i| (InferVar(offset + i), Type::infer(*i)))
            .collect(),
    );
    pred.apply(&to_tmp).apply(&from_tmp)
}

pub fn alpha_equivalent(a: &Predicate, b: &Predicate) -> bool {
    canonicalize(a) == canonicalize(b)
}
