//! Well-formedness checks: arities, bound names and associated bindings.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::ast::*;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
    pub span: Option<Span>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(span) => write!(f, "{span}: {} [{}]", self.message, self.code),
            None => write!(f, "{} [{}]", self.message, self.code),
        }
    }
}

/// Returns every problem found; an empty list means the context is ready
/// to solve.
pub fn check_well_formed(ctx: &Context) -> Vec<Diagnostic> {
    let mut checker = Checker { ctx, out: Vec::new() };
    let mut impl_ids = HashSet::new();
    for decl in &ctx.declarations {
        let span = &decl.span;
        match &decl.kind {
            DeclKind::Newtype(n) => {
                let scope = checker.params(&n.params, &[], span);
                checker.ty(&n.body, &scope, span);
            }
            DeclKind::Trait(t) => {
                let scope = checker.params(&t.params, &["Self".to_string()], span);
                for a in &t.assoc {
                    checker.params(&a.params, &scope, span);
                }
                if let Some(n) = t.callable {
                    let count = t.params.types.len();
                    if count != n && count != n + 1 {
                        checker.report(
                            "callable-params",
                            format!(
                                "callable trait `{}` of arity {n} must take {n} or {} type parameters, found {count}",
                                checker.name(t.name),
                                n + 1
                            ),
                            span,
                        );
                    }
                }
            }
            DeclKind::Impl(i) => {
                if !impl_ids.insert(i.id) {
                    checker.report("duplicate-impl", format!("impl id {} is used twice", i.id.0), span);
                }
                let scope = checker.params(&i.params, &[], span);
                checker.ty(&i.self_ty, &scope, span);
                checker.instance(&i.instance, &scope, span);
                checker.bindings(i, &scope, span);
            }
        }
    }
    let mut labels = HashSet::new();
    for goal in &ctx.goals {
        if !labels.insert(goal.label.as_str()) {
            checker.report("duplicate-goal", format!("goal `{}` is defined twice", goal.label), &goal.span);
        }
        checker.pred(&goal.predicate, &[], &goal.span);
    }
    checker.out
}

struct Checker<'c> {
    ctx: &'c Context,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, code: &'static str, message: String, span: &Span) {
        let span = (*span != Span::default()).then(|| span.clone());
        self.out.push(Diagnostic { code, message, span });
    }

    fn name(&self, id: SymbolId) -> String {
        self.ctx
            .symbol(id)
            .map(|s| s.path.clone())
            .unwrap_or_else(|| format!("#{}", id.0))
    }

    fn expect_kind(&mut self, id: SymbolId, kind: SymbolKind, span: &Span) -> bool {
        match self.ctx.symbol(id) {
            None => {
                self.report("unknown-symbol", format!("symbol #{} is not declared", id.0), span);
                false
            }
            Some(info) if info.kind != kind => {
                self.report(
                    "wrong-symbol-kind",
                    format!("`{}` is not a {}", info.path, kind_name(kind)),
                    span,
                );
                false
            }
            Some(_) => true,
        }
    }

    /// Checks a parameter list and returns the names in scope inside it.
    fn params(&mut self, params: &Params, outer: &[String], span: &Span) -> Vec<String> {
        let mut seen = BTreeSet::new();
        for name in &params.types {
            if !seen.insert(name) {
                self.report("duplicate-binder", format!("type parameter `{name}` is bound twice"), span);
            }
        }
        let mut scope = outer.to_vec();
        scope.extend(params.types.iter().cloned());
        for p in &params.where_clauses {
            self.pred(p, &scope, span);
        }
        scope
    }

    fn bindings(&mut self, imp: &ImplDecl, scope: &[String], span: &Span) {
        let Some((tr, _)) = self.ctx.trait_decl(imp.instance.trait_id) else {
            return;
        };
        for a in &tr.assoc {
            let n = imp.bindings.iter().filter(|b| b.assoc == a.name).count();
            if n == 0 {
                self.report(
                    "missing-binding",
                    format!("impl of `{}` does not bind `{}`", self.name(tr.name), self.name(a.name)),
                    span,
                );
            } else if n > 1 {
                self.report("duplicate-binding", format!("`{}` is bound {n} times", self.name(a.name)), span);
            }
        }
        for b in &imp.bindings {
            let Some(decl) = tr.assoc.iter().find(|a| a.name == b.assoc) else {
                self.report(
                    "extra-binding",
                    format!("`{}` is not an associated type of `{}`", self.name(b.assoc), self.name(tr.name)),
                    span,
                );
                continue;
            };
            if decl.params.types.len() != b.params.types.len() {
                self.report(
                    "arity",
                    format!(
                        "binding of `{}` takes {} type parameters, the trait declares {}",
                        self.name(b.assoc),
                        b.params.types.len(),
                        decl.params.types.len()
                    ),
                    span,
                );
            }
            let inner = self.params(&b.params, scope, span);
            self.ty(&b.ty, &inner, span);
        }
    }

    fn pred(&mut self, p: &Predicate, scope: &[String], span: &Span) {
        match p {
            Predicate::TraitBound { self_ty, instance } => {
                self.ty(self_ty, scope, span);
                self.instance(instance, scope, span);
            }
            Predicate::Outlives { self_ty, .. } => self.ty(self_ty, scope, span),
            Predicate::ProjectionEq { projection, rhs } => {
                self.projection(projection, scope, span);
                self.ty(rhs, scope, span);
            }
        }
    }

    fn instance(&mut self, inst: &TraitInstance, scope: &[String], span: &Span) {
        if self.expect_kind(inst.trait_id, SymbolKind::Trait, span) {
            if let Some((tr, _)) = self.ctx.trait_decl(inst.trait_id) {
                let (want_t, want_r) = (tr.params.types.len(), tr.params.regions.len());
                if inst.type_args.len() != want_t || inst.region_args.len() != want_r {
                    self.report(
                        "arity",
                        format!(
                            "trait `{}` takes {want_t} type and {want_r} region arguments, found {} and {}",
                            self.name(inst.trait_id),
                            inst.type_args.len(),
                            inst.region_args.len()
                        ),
                        span,
                    );
                }
            }
        }
        for t in &inst.type_args {
            self.ty(t, scope, span);
        }
    }

    fn projection(&mut self, p: &Projection, scope: &[String], span: &Span) {
        self.ty(&p.self_ty, scope, span);
        self.instance(&p.instance, scope, span);
        if self.expect_kind(p.assoc, SymbolKind::AssocType, span) {
            let decl = self
                .ctx
                .trait_decl(p.instance.trait_id)
                .and_then(|(tr, _)| tr.assoc.iter().find(|a| a.name == p.assoc));
            match decl {
                None => self.report(
                    "foreign-assoc",
                    format!("`{}` is not declared in `{}`", self.name(p.assoc), self.name(p.instance.trait_id)),
                    span,
                ),
                Some(a) if a.params.types.len() != p.type_args.len() => self.report(
                    "arity",
                    format!(
                        "`{}` takes {} type arguments, found {}",
                        self.name(p.assoc),
                        a.params.types.len(),
                        p.type_args.len()
                    ),
                    span,
                ),
                Some(_) => {}
            }
        }
        for t in &p.type_args {
            self.ty(t, scope, span);
        }
    }

    fn ty(&mut self, ty: &Type, scope: &[String], span: &Span) {
        match ty {
            Type::Unit | Type::Infer { .. } => {}
            Type::Param { name } => {
                if !scope.contains(name) {
                    self.report("unbound-param", format!("type parameter `{name}` is not bound"), span);
                }
            }
            Type::Ref { inner, .. } => self.ty(inner, scope, span),
            Type::Ctor { head, args } => {
                if self.expect_kind(*head, SymbolKind::Newtype, span) {
                    if let Some((decl, _)) = self.ctx.newtype(*head) {
                        if decl.params.types.len() != args.len() {
                            self.report(
                                "arity",
                                format!(
                                    "`{}` takes {} type arguments, found {}",
                                    self.name(*head),
                                    decl.params.types.len(),
                                    args.len()
                                ),
                                span,
                            );
                        }
                    }
                }
                for a in args {
                    self.ty(a, scope, span);
                }
            }
            Type::Tuple { left, right } => {
                self.ty(left, scope, span);
                self.ty(right, scope, span);
            }
            Type::Function { param, result, .. } => {
                self.ty(param, scope, span);
                self.ty(result, scope, span);
            }
            Type::Projection(p) => self.projection(p, scope, span),
            Type::Existential { binder, bounds } => {
                let mut inner = scope.to_vec();
                inner.push(binder.clone());
                for b in bounds {
                    self.pred(b, &inner, span);
                }
            }
        }
    }
}

fn kind_name(kind: SymbolKind) -> &'static str {
    match kind {
        SymbolKind::Newtype => "type",
        SymbolKind::Trait => "trait",
        SymbolKind::AssocType => "associated type",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse::parse_context;

    fn check(src: &str) -> Vec<Diagnostic> {
        check_well_formed(&parse_context(src, "t.tl", Provenance::Local).unwrap())
    }

    #[test]
    fn clean_program_has_no_diagnostics() {
        let src = "trait SystemParam; newtype ResMut<T> = unit; trait Resource;\n\
                   impl<T> SystemParam for ResMut<T> where T: Resource;\n\
                   goal g: ResMut<?0>: SystemParam;";
        assert_eq!(check(src), vec![]);
    }

    #[test]
    fn missing_assoc_binding() {
        let d = check("trait AstAssocs { type Data; } newtype E = unit; impl AstAssocs for E;");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "missing-binding");
        assert_eq!(d[0].span, Some(Span::new("t.tl", 1, 1)));
    }

    #[test]
    fn wrong_trait_arity_in_goal() {
        let d = check("trait Tr<A>; newtype X = unit; goal g: X: Tr<X, X>;");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "arity");
    }

    #[test]
    fn unbound_param_and_ctor_arity() {
        let mut ctx = parse_context("newtype Box<T> = unit; newtype Bad = unit;", "t.tl", Provenance::Local).unwrap();
        let boxed = Type::ctor(ctx.symbol_by_path("Box").unwrap(), vec![Type::param("U")]);
        if let DeclKind::Newtype(n) = &mut ctx.declarations[1].kind {
            n.body = boxed;
        }
        let d = check_well_formed(&ctx);
        let codes: Vec<_> = d.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec!["unbound-param"]);
        let d = check("newtype Box<T> = unit; newtype Bad = Box;");
        assert_eq!(d[0].code, "arity");
    }

    #[test]
    fn callable_parameter_count() {
        assert!(check("#[callable(arity = 1)] trait F<A>;").is_empty());
        assert!(check("#[callable(arity = 1)] trait F<A, R>;").is_empty());
        assert_eq!(check("#[callable(arity = 2)] trait F<A>;")[0].code, "callable-params");
    }
}
