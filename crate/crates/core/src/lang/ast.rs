//! Terms, predicates and declarations of the trait language.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImplId(pub u32);

/// An inference variable, printed as `?N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InferVar(pub u32);

impl fmt::Display for InferVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// A region name such as `'static`. Regions are opaque: no ordering is kept.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionVar(pub String);

impl RegionVar {
    pub fn new(name: impl Into<String>) -> Self {
        RegionVar(name.into())
    }
}

/// Binder name used for the bound variable of `dyn` types.
pub const DYN_BINDER: &str = "$dyn";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Type {
    Unit,
    /// A type variable bound by an enclosing parameter list.
    Param { name: String },
    Infer { var: InferVar },
    Ref {
        region: RegionVar,
        mutable: bool,
        inner: Box<Type>,
    },
    Ctor { head: SymbolId, args: Vec<Type> },
    Tuple { left: Box<Type>, right: Box<Type> },
    /// Curried function type. `arity` is the surface parameter count of the
    /// outermost arrow; `fn(A, B) -> C` is `Function(A, Function(B, C))`
    /// with arities 2 and 1, and `fn() -> C` is `Function(unit, C)` with
    /// arity 0.
    Function {
        param: Box<Type>,
        result: Box<Type>,
        arity: usize,
    },
    Projection(Box<Projection>),
    Existential {
        binder: String,
        bounds: Vec<Predicate>,
    },
}

impl Type {
    pub fn param(name: impl Into<String>) -> Type {
        Type::Param { name: name.into() }
    }

    pub fn infer(index: u32) -> Type {
        Type::Infer {
            var: InferVar(index),
        }
    }

    pub fn ctor(head: SymbolId, args: Vec<Type>) -> Type {
        Type::Ctor { head, args }
    }

    pub fn tuple(left: Type, right: Type) -> Type {
        Type::Tuple {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Builds the curried form of a surface function `fn(params..) -> result`.
    pub fn function(params: Vec<Type>, result: Type) -> Type {
        if params.is_empty() {
            return Type::Function {
                param: Box::new(Type::Unit),
                result: Box::new(result),
                arity: 0,
            };
        }
        let arity = params.len();
        let mut ty = result;
        for (i, param) in params.into_iter().enumerate().rev() {
            ty = Type::Function {
                param: Box::new(param),
                result: Box::new(ty),
                arity: arity - i,
            };
        }
        ty
    }

    /// Splits a function type into its surface parameters and result.
    pub fn surface_signature(&self) -> Option<(Vec<&Type>, &Type)> {
        let Type::Function { arity, .. } = self else {
            return None;
        };
        if *arity == 0 {
            let Type::Function { result, .. } = self else {
                unreachable!()
            };
            return Some((Vec::new(), result));
        }
        let mut params = Vec::with_capacity(*arity);
        let mut cur = self;
        for _ in 0..*arity {
            match cur {
                Type::Function { param, result, .. } => {
                    params.push(param.as_ref());
                    cur = result;
                }
                _ => return None,
            }
        }
        Some((params, cur))
    }

    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Type)) {
        f(self);
        match self {
            Type::Unit | Type::Param { .. } | Type::Infer { .. } => {}
            Type::Ref { inner, .. } => inner.visit(f),
            Type::Ctor { args, .. } => args.iter().for_each(|a| a.visit(f)),
            Type::Tuple { left, right } => {
                left.visit(f);
                right.visit(f);
            }
            Type::Function { param, result, .. } => {
                param.visit(f);
                result.visit(f);
            }
            Type::Projection(p) => p.visit_types(f),
            Type::Existential { bounds, .. } => bounds.iter().for_each(|b| b.visit_types(f)),
        }
    }

    pub fn contains_projection(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if matches!(t, Type::Projection(_)) {
                found = true;
            }
        });
        found
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraitInstance {
    #[serde(rename = "trait")]
    pub trait_id: SymbolId,
    pub type_args: Vec<Type>,
    pub region_args: Vec<RegionVar>,
}

impl TraitInstance {
    pub fn new(trait_id: SymbolId, type_args: Vec<Type>) -> Self {
        TraitInstance {
            trait_id,
            type_args,
            region_args: Vec::new(),
        }
    }
}

/// `<self_ty as instance>::assoc<type_args>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Projection {
    pub self_ty: Type,
    pub assoc: SymbolId,
    pub instance: TraitInstance,
    pub type_args: Vec<Type>,
    pub region_args: Vec<RegionVar>,
}

impl Projection {
    fn visit_types<'a>(&'a self, f: &mut dyn FnMut(&'a Type)) {
        self.self_ty.visit(f);
        self.instance.type_args.iter().for_each(|t| t.visit(f));
        self.type_args.iter().for_each(|t| t.visit(f));
    }

    /// The trait bound that must hold for this projection to normalize.
    pub fn trait_bound(&self) -> Predicate {
        Predicate::TraitBound {
            self_ty: self.self_ty.clone(),
            instance: self.instance.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    TraitBound {
        self_ty: Type,
        instance: TraitInstance,
    },
    Outlives {
        self_ty: Type,
        region: RegionVar,
    },
    ProjectionEq {
        projection: Projection,
        rhs: Type,
    },
}

impl Predicate {
    pub fn trait_bound(self_ty: Type, trait_id: SymbolId, type_args: Vec<Type>) -> Predicate {
        Predicate::TraitBound {
            self_ty,
            instance: TraitInstance::new(trait_id, type_args),
        }
    }

    pub fn visit_types<'a>(&'a self, f: &mut dyn FnMut(&'a Type)) {
        match self {
            Predicate::TraitBound { self_ty, instance } => {
                self_ty.visit(f);
                instance.type_args.iter().for_each(|t| t.visit(f));
            }
            Predicate::Outlives { self_ty, .. } => self_ty.visit(f),
            Predicate::ProjectionEq { projection, rhs } => {
                projection.visit_types(f);
                rhs.visit(f);
            }
        }
    }

    /// Distinct inference variables in order of first occurrence.
    pub fn infer_vars(&self) -> Vec<InferVar> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit_types(&mut |t| {
            if let Type::Infer { var } = t {
                if seen.insert(*var) {
                    out.push(*var);
                }
            }
        });
        out
    }

    pub fn has_infer_vars(&self) -> bool {
        let mut found = false;
        self.visit_types(&mut |t| {
            if matches!(t, Type::Infer { .. }) {
                found = true;
            }
        });
        found
    }

    pub fn contains_projection(&self) -> bool {
        let mut found = false;
        self.visit_types(&mut |t| {
            if matches!(t, Type::Projection(_)) {
                found = true;
            }
        });
        found
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Local,
    External,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub file: String,
    pub line_start: u32,
    pub line_end: u32,
}

impl Span {
    pub fn new(file: impl Into<String>, line_start: u32, line_end: u32) -> Self {
        Span {
            file: file.into(),
            line_start,
            line_end,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line_start == self.line_end {
            write!(f, "{}:{}", self.file, self.line_start)
        } else {
            write!(f, "{}:{}-{}", self.file, self.line_start, self.line_end)
        }
    }
}

/// `forall regions, types where where_clauses`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub regions: Vec<RegionVar>,
    pub types: Vec<String>,
    pub where_clauses: Vec<Predicate>,
}

impl Params {
    pub fn types(names: &[&str]) -> Self {
        Params {
            types: names.iter().map(|s| s.to_string()).collect(),
            ..Params::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtypeDecl {
    pub head: SymbolId,
    pub params: Params,
    pub body: Type,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssocDecl {
    pub name: SymbolId,
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraitDecl {
    pub name: SymbolId,
    pub params: Params,
    pub assoc: Vec<AssocDecl>,
    /// Set by `#[callable(arity = N)]`: the trait describes things callable
    /// with `N` arguments. Its first `N` type parameters are the argument
    /// types, an optional extra one is the return type.
    pub callable: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssocBinding {
    pub assoc: SymbolId,
    pub params: Params,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplDecl {
    pub id: ImplId,
    pub params: Params,
    pub instance: TraitInstance,
    pub self_ty: Type,
    pub bindings: Vec<AssocBinding>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeclKind {
    Newtype(NewtypeDecl),
    Trait(TraitDecl),
    Impl(ImplDecl),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub kind: DeclKind,
    pub provenance: Provenance,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Newtype,
    Trait,
    AssocType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolInfo {
    pub kind: SymbolKind,
    /// Fully-qualified path, `::`-separated.
    pub path: String,
    pub provenance: Provenance,
    pub span: Span,
}

impl SymbolInfo {
    /// The terminal segment of the path.
    pub fn name(&self) -> &str {
        self.path.rsplit("::").next().unwrap_or(&self.path)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalItem {
    pub label: String,
    pub predicate: Predicate,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub declarations: Vec<Declaration>,
    pub goals: Vec<GoalItem>,
    pub symbols: BTreeMap<SymbolId, SymbolInfo>,
}

impl Context {
    pub fn symbol(&self, id: SymbolId) -> Option<&SymbolInfo> {
        self.symbols.get(&id)
    }

    pub fn symbol_by_path(&self, path: &str) -> Option<SymbolId> {
        self.symbols
            .iter()
            .find(|(_, info)| info.path == path)
            .map(|(id, _)| *id)
    }

    /// Looks a symbol up by its terminal name, or by full path when `name`
    /// contains `::`. Returns `None` when the name is ambiguous.
    pub fn symbol_by_name(&self, name: &str) -> Option<SymbolId> {
        if name.contains("::") {
            return self.symbol_by_path(name);
        }
        let mut hits = self.symbols.iter().filter(|(_, info)| info.name() == name);
        let first = hits.next().map(|(id, _)| *id);
        if hits.next().is_some() {
            return None;
        }
        first
    }

    pub fn newtype(&self, id: SymbolId) -> Option<(&NewtypeDecl, &Declaration)> {
        self.declarations.iter().find_map(|d| match &d.kind {
            DeclKind::Newtype(n) if n.head == id => Some((n, d)),
            _ => None,
        })
    }

    pub fn trait_decl(&self, id: SymbolId) -> Option<(&TraitDecl, &Declaration)> {
        self.declarations.iter().find_map(|d| match &d.kind {
            DeclKind::Trait(t) if t.name == id => Some((t, d)),
            _ => None,
        })
    }

    /// The trait declaring associated type `assoc`.
    pub fn assoc_owner(&self, assoc: SymbolId) -> Option<&TraitDecl> {
        self.declarations.iter().find_map(|d| match &d.kind {
            DeclKind::Trait(t) if t.assoc.iter().any(|a| a.name == assoc) => Some(t),
            _ => None,
        })
    }

    pub fn impls(&self) -> impl Iterator<Item = (&ImplDecl, &Declaration)> {
        self.declarations.iter().filter_map(|d| match &d.kind {
            DeclKind::Impl(i) => Some((i, d)),
            _ => None,
        })
    }

    /// Impls of `trait_id` in declaration order.
    pub fn impls_of(&self, trait_id: SymbolId) -> impl Iterator<Item = (&ImplDecl, &Declaration)> {
        self.impls()
            .filter(move |(i, _)| i.instance.trait_id == trait_id)
    }

    pub fn impl_decl(&self, id: ImplId) -> Option<(&ImplDecl, &Declaration)> {
        self.impls().find(|(i, _)| i.id == id)
    }

    /// Surface arity of a function item: a parameterless newtype whose body
    /// is a function type.
    pub fn fn_item_arity(&self, id: SymbolId) -> Option<usize> {
        let (decl, _) = self.newtype(id)?;
        if !decl.params.types.is_empty() {
            return None;
        }
        match &decl.body {
            Type::Function { arity, .. } => Some(*arity),
            _ => None,
        }
    }

    pub fn goal(&self, label: &str) -> Option<&GoalItem> {
        self.goals.iter().find(|g| g.label == label)
    }

    /// A copy with every span cleared, for comparisons that ignore source
    /// locations.
    pub fn without_spans(&self) -> Context {
        let mut ctx = self.clone();
        for d in &mut ctx.declarations {
            d.span = Span::default();
        }
        for g in &mut ctx.goals {
            g.span = Span::default();
        }
        for info in ctx.symbols.values_mut() {
            info.span = Span::default();
        }
        ctx
    }
}
