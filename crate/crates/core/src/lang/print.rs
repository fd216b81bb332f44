//! Pretty-printing of terms, and rendering of whole contexts back to
//! surface syntax.

use std::collections::HashMap;
use std::fmt::Write;

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrintMode {
    /// Terminal names only; constructor and trait arguments collapse to `<..>`.
    Shortened,
    /// Complete paths and every argument.
    FullyQualified,
}

pub trait PrettyPrint {
    fn write_pretty(&self, out: &mut String, mode: PrintMode, ctx: &Context);
}

pub fn pretty_print<T: PrettyPrint + ?Sized>(item: &T, mode: PrintMode, ctx: &Context) -> String {
    let mut out = String::new();
    item.write_pretty(&mut out, mode, ctx);
    out
}

fn symbol_text(id: SymbolId, mode: PrintMode, ctx: &Context) -> String {
    match ctx.symbol(id) {
        Some(info) if mode == PrintMode::Shortened => info.name().to_string(),
        Some(info) => info.path.clone(),
        None => format!("#{}", id.0),
    }
}

fn write_args(out: &mut String, regions: &[RegionVar], types: &[Type], mode: PrintMode, ctx: &Context) {
    if regions.is_empty() && types.is_empty() {
        return;
    }
    if mode == PrintMode::Shortened {
        out.push_str("<..>");
        return;
    }
    out.push('<');
    let mut first = true;
    for r in regions {
        if !first {
            out.push_str(", ");
        }
        first = false;
        let _ = write!(out, "'{}", r.0);
    }
    for t in types {
        if !first {
            out.push_str(", ");
        }
        first = false;
        t.write_pretty(out, mode, ctx);
    }
    out.push('>');
}

impl PrettyPrint for Type {
    fn write_pretty(&self, out: &mut String, mode: PrintMode, ctx: &Context) {
        match self {
            Type::Unit => out.push_str("()"),
            Type::Param { name } => out.push_str(name),
            Type::Infer { var } => {
                let _ = write!(out, "{var}");
            }
            Type::Ref { region, mutable, inner } => {
                let _ = write!(out, "&'{} ", region.0);
                if *mutable {
                    out.push_str("mut ");
                }
                inner.write_pretty(out, mode, ctx);
            }
            Type::Ctor { head, args } => {
                if args.is_empty() && ctx.fn_item_arity(*head).is_some() {
                    match mode {
                        PrintMode::Shortened => {
                            let _ = write!(out, "{{{}}}", symbol_text(*head, mode, ctx));
                        }
                        PrintMode::FullyQualified => {
                            let (decl, _) = ctx.newtype(*head).expect("function item is a newtype");
                            write_function(out, &decl.body, mode, ctx);
                            let _ = write!(out, " {{{}}}", symbol_text(*head, mode, ctx));
                        }
                    }
                    return;
                }
                out.push_str(&symbol_text(*head, mode, ctx));
                write_args(out, &[], args, mode, ctx);
            }
            Type::Tuple { left, right } => {
                out.push('(');
                left.write_pretty(out, mode, ctx);
                out.push_str(", ");
                right.write_pretty(out, mode, ctx);
                out.push(')');
            }
            Type::Function { .. } => write_function(out, self, mode, ctx),
            Type::Projection(p) => p.write_pretty(out, mode, ctx),
            Type::Existential { binder, bounds } => {
                out.push_str("dyn ");
                write_dyn_bounds(out, binder, bounds, mode, ctx);
            }
        }
    }
}

fn write_function(out: &mut String, ty: &Type, mode: PrintMode, ctx: &Context) {
    let (params, result) = match ty.surface_signature() {
        Some(sig) => sig,
        None => match ty {
            Type::Function { param, result, .. } => (vec![param.as_ref()], result.as_ref()),
            _ => return ty.write_pretty(out, mode, ctx),
        },
    };
    out.push_str("fn(");
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        p.write_pretty(out, mode, ctx);
    }
    out.push(')');
    if *result != Type::Unit {
        out.push_str(" -> ");
        result.write_pretty(out, mode, ctx);
    }
}

fn write_dyn_bounds(out: &mut String, binder: &str, bounds: &[Predicate], mode: PrintMode, ctx: &Context) {
    let mut first = true;
    for b in bounds {
        if !first {
            out.push_str(" + ");
        }
        first = false;
        match b {
            Predicate::TraitBound { self_ty, instance } if is_binder(self_ty, binder) => {
                instance.write_pretty(out, mode, ctx)
            }
            Predicate::Outlives { self_ty, region } if is_binder(self_ty, binder) => {
                let _ = write!(out, "'{}", region.0);
            }
            other => {
                out.push('(');
                other.write_pretty(out, mode, ctx);
                out.push(')');
            }
        }
    }
}

fn is_binder(ty: &Type, binder: &str) -> bool {
    matches!(ty, Type::Param { name } if name == binder)
}

impl PrettyPrint for TraitInstance {
    fn write_pretty(&self, out: &mut String, mode: PrintMode, ctx: &Context) {
        out.push_str(&symbol_text(self.trait_id, mode, ctx));
        write_args(out, &self.region_args, &self.type_args, mode, ctx);
    }
}

impl PrettyPrint for Projection {
    fn write_pretty(&self, out: &mut String, mode: PrintMode, ctx: &Context) {
        out.push('<');
        self.self_ty.write_pretty(out, mode, ctx);
        out.push_str(" as ");
        self.instance.write_pretty(out, mode, ctx);
        out.push_str(">::");
        let assoc = ctx
            .symbol(self.assoc)
            .map(|s| s.name().to_string())
            .unwrap_or_else(|| format!("#{}", self.assoc.0));
        out.push_str(&assoc);
        write_args(out, &self.region_args, &self.type_args, mode, ctx);
    }
}

impl PrettyPrint for Predicate {
    fn write_pretty(&self, out: &mut String, mode: PrintMode, ctx: &Context) {
        match self {
            Predicate::TraitBound { self_ty, instance } => {
                self_ty.write_pretty(out, mode, ctx);
                out.push_str(": ");
                instance.write_pretty(out, mode, ctx);
            }
            Predicate::Outlives { self_ty, region } => {
                self_ty.write_pretty(out, mode, ctx);
                let _ = write!(out, ": '{}", region.0);
            }
            Predicate::ProjectionEq { projection, rhs } => {
                projection.write_pretty(out, mode, ctx);
                out.push_str(" == ");
                rhs.write_pretty(out, mode, ctx);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Surface rendering

/// Renders a context as `.tl` source that parses back to the same context
/// (up to spans). Each named declaration sits in a `mod` block for its
/// module; references use the shortest path suffix that resolves to the
/// intended symbol from that module.
pub fn render_context(ctx: &Context) -> String {
    Renderer::new(ctx).render()
}

struct Renderer<'c> {
    ctx: &'c Context,
    by_path: HashMap<&'c str, SymbolId>,
}

struct Scope<'a> {
    module: Vec<&'a str>,
    params: Vec<&'a str>,
}

impl<'c> Renderer<'c> {
    fn new(ctx: &'c Context) -> Self {
        let by_path = ctx.symbols.iter().map(|(id, info)| (info.path.as_str(), *id)).collect();
        Renderer { ctx, by_path }
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for decl in &self.ctx.declarations {
            self.decl(&mut out, decl);
        }
        for goal in &self.ctx.goals {
            let scope = Scope {
                module: Vec::new(),
                params: Vec::new(),
            };
            let _ = write!(out, "goal {}: ", goal.label);
            self.pred(&mut out, &goal.predicate, &scope);
            out.push_str(";\n");
        }
        out
    }

    fn module_of(&self, id: SymbolId) -> Vec<&'c str> {
        let path = &self.ctx.symbols[&id].path;
        let mut segs: Vec<&str> = path.split("::").collect();
        segs.pop();
        segs
    }

    fn decl(&self, out: &mut String, decl: &Declaration) {
        let module = match &decl.kind {
            DeclKind::Newtype(n) => self.module_of(n.head),
            DeclKind::Trait(t) => self.module_of(t.name),
            DeclKind::Impl(_) => Vec::new(),
        };
        let ext = if decl.provenance == Provenance::External {
            "extern "
        } else {
            ""
        };
        let mut body = String::new();
        match &decl.kind {
            DeclKind::Newtype(n) => {
                let scope = Scope {
                    module: module.clone(),
                    params: n.params.types.iter().map(String::as_str).collect(),
                };
                let name = self.ctx.symbols[&n.head].name();
                let _ = write!(body, "{ext}newtype {name}");
                self.binders(&mut body, &n.params);
                self.wheres(&mut body, &n.params, &scope);
                body.push_str(" = ");
                self.ty(&mut body, &n.body, &scope);
                body.push(';');
            }
            DeclKind::Trait(t) => {
                let scope = Scope {
                    module: module.clone(),
                    params: t.params.types.iter().map(String::as_str).collect(),
                };
                if let Some(n) = t.callable {
                    let _ = write!(body, "#[callable(arity = {n})] ");
                }
                let name = self.ctx.symbols[&t.name].name();
                let _ = write!(body, "{ext}trait {name}");
                self.binders(&mut body, &t.params);
                self.wheres(&mut body, &t.params, &scope);
                if t.assoc.is_empty() {
                    body.push(';');
                } else {
                    body.push_str(" {");
                    for a in &t.assoc {
                        let mut ascope = Scope {
                            module: module.clone(),
                            params: scope.params.clone(),
                        };
                        ascope.params.extend(a.params.types.iter().map(String::as_str));
                        let _ = write!(body, " type {}", self.ctx.symbols[&a.name].name());
                        self.binders(&mut body, &a.params);
                        self.wheres(&mut body, &a.params, &ascope);
                        body.push(';');
                    }
                    body.push_str(" }");
                }
            }
            DeclKind::Impl(i) => {
                let scope = Scope {
                    module: Vec::new(),
                    params: i.params.types.iter().map(String::as_str).collect(),
                };
                let _ = write!(body, "{ext}impl");
                self.binders(&mut body, &i.params);
                body.push(' ');
                self.instance(&mut body, &i.instance, &scope);
                body.push_str(" for ");
                self.ty(&mut body, &i.self_ty, &scope);
                self.wheres(&mut body, &i.params, &scope);
                if i.bindings.is_empty() {
                    body.push(';');
                } else {
                    body.push_str(" {");
                    for b in &i.bindings {
                        let mut bscope = Scope {
                            module: Vec::new(),
                            params: scope.params.clone(),
                        };
                        bscope.params.extend(b.params.types.iter().map(String::as_str));
                        let _ = write!(body, " type {}", self.ctx.symbols[&b.assoc].name());
                        self.binders(&mut body, &b.params);
                        self.wheres(&mut body, &b.params, &bscope);
                        body.push_str(" = ");
                        self.ty(&mut body, &b.ty, &bscope);
                        body.push(';');
                    }
                    body.push_str(" }");
                }
            }
        }
        if module.is_empty() {
            let _ = writeln!(out, "{body}");
        } else {
            let _ = writeln!(out, "mod {} {{ {body} }}", module.join("::"));
        }
    }

    fn binders(&self, out: &mut String, params: &Params) {
        if params.regions.is_empty() && params.types.is_empty() {
            return;
        }
        let items: Vec<String> = params
            .regions
            .iter()
            .map(|r| format!("'{}", r.0))
            .chain(params.types.iter().cloned())
            .collect();
        let _ = write!(out, "<{}>", items.join(", "));
    }

    fn wheres(&self, out: &mut String, params: &Params, scope: &Scope<'_>) {
        if params.where_clauses.is_empty() {
            return;
        }
        out.push_str(" where ");
        for (i, p) in params.where_clauses.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.pred(out, p, scope);
        }
    }

    /// The shortest suffix of `id`'s path that resolves back to `id` from
    /// `scope`, falling back to an absolute path.
    fn reference(&self, id: SymbolId, scope: &Scope<'_>, bare_ok: bool) -> String {
        let path = &self.ctx.symbols[&id].path;
        let segs: Vec<&str> = path.split("::").collect();
        for k in 1..=segs.len() {
            let tail = segs[segs.len() - k..].join("::");
            if k == 1 && !bare_ok && scope.params.contains(&segs[segs.len() - 1]) {
                continue;
            }
            if self.resolve(&tail, &scope.module) == Some(id) {
                return tail;
            }
        }
        format!("::{path}")
    }

    fn resolve(&self, tail: &str, module: &[&str]) -> Option<SymbolId> {
        (0..=module.len()).rev().find_map(|k| {
            let candidate = if k == 0 {
                tail.to_string()
            } else {
                format!("{}::{tail}", module[..k].join("::"))
            };
            self.by_path.get(candidate.as_str()).copied()
        })
    }

    fn generic(&self, out: &mut String, regions: &[RegionVar], types: &[Type], scope: &Scope<'_>) {
        if regions.is_empty() && types.is_empty() {
            return;
        }
        out.push('<');
        let mut first = true;
        for r in regions {
            if !first {
                out.push_str(", ");
            }
            first = false;
            let _ = write!(out, "'{}", r.0);
        }
        for t in types {
            if !first {
                out.push_str(", ");
            }
            first = false;
            self.ty(out, t, scope);
        }
        out.push('>');
    }

    fn instance(&self, out: &mut String, inst: &TraitInstance, scope: &Scope<'_>) {
        out.push_str(&self.reference(inst.trait_id, scope, true));
        self.generic(out, &inst.region_args, &inst.type_args, scope);
    }

    fn ty(&self, out: &mut String, ty: &Type, scope: &Scope<'_>) {
        match ty {
            Type::Unit => out.push_str("unit"),
            Type::Param { name } if name == "Self" => out.push_str("Self"),
            Type::Param { name } => out.push_str(name),
            Type::Infer { var } => {
                let _ = write!(out, "{var}");
            }
            Type::Ref { region, mutable, inner } => {
                let _ = write!(out, "&'{} ", region.0);
                if *mutable {
                    out.push_str("mut ");
                }
                self.ty(out, inner, scope);
            }
            Type::Ctor { head, args } => {
                out.push_str(&self.reference(*head, scope, !args.is_empty()));
                self.generic(out, &[], args, scope);
            }
            Type::Tuple { left, right } => {
                out.push('(');
                self.ty(out, left, scope);
                out.push_str(", ");
                self.ty(out, right, scope);
                out.push(')');
            }
            Type::Function { param, result, .. } => {
                let (params, result) = ty
                    .surface_signature()
                    .unwrap_or_else(|| (vec![param.as_ref()], result.as_ref()));
                out.push_str("fn(");
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.ty(out, p, scope);
                }
                out.push_str(") -> ");
                self.ty(out, result, scope);
            }
            Type::Projection(p) => {
                out.push('<');
                self.ty(out, &p.self_ty, scope);
                out.push_str(" as ");
                self.instance(out, &p.instance, scope);
                let _ = write!(out, ">::{}", self.ctx.symbols[&p.assoc].name());
                self.generic(out, &p.region_args, &p.type_args, scope);
            }
            Type::Existential { binder, bounds } => {
                out.push_str("dyn ");
                for (i, b) in bounds.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    match b {
                        Predicate::TraitBound { self_ty, instance } if is_binder(self_ty, binder) => {
                            self.instance(out, instance, scope)
                        }
                        Predicate::Outlives { self_ty, region } if is_binder(self_ty, binder) => {
                            let _ = write!(out, "'{}", region.0);
                        }
                        // Not expressible in surface syntax.
                        _ => {}
                    }
                }
            }
        }
    }

    fn pred(&self, out: &mut String, p: &Predicate, scope: &Scope<'_>) {
        match p {
            Predicate::TraitBound { self_ty, instance } => {
                self.ty(out, self_ty, scope);
                out.push_str(": ");
                self.instance(out, instance, scope);
            }
            Predicate::Outlives { self_ty, region } => {
                self.ty(out, self_ty, scope);
                let _ = write!(out, ": '{}", region.0);
            }
            Predicate::ProjectionEq { projection, rhs } => {
                self.ty(out, &Type::Projection(Box::new(projection.clone())), scope);
                out.push_str(" == ");
                self.ty(out, rhs, scope);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse::parse_context;

    fn ctx(src: &str) -> Context {
        parse_context(src, "t.tl", Provenance::Local).unwrap()
    }

    #[test]
    fn shortened_collapses_arguments() {
        let c = ctx("mod diesel { newtype table = unit; newtype FromClause<T> = unit; newtype SelectStatement<F> = unit; }");
        let table = Type::ctor(c.symbol_by_path("diesel::table").unwrap(), vec![]);
        let from = Type::ctor(c.symbol_by_path("diesel::FromClause").unwrap(), vec![table]);
        let select = Type::ctor(c.symbol_by_path("diesel::SelectStatement").unwrap(), vec![from]);
        assert_eq!(pretty_print(&select, PrintMode::Shortened, &c), "SelectStatement<..>");
        assert_eq!(
            pretty_print(&select, PrintMode::FullyQualified, &c),
            "diesel::SelectStatement<diesel::FromClause<diesel::table>>"
        );
    }

    #[test]
    fn leaf_symbols_and_bounds() {
        let c = ctx("mod app { newtype Timer = unit; } extern trait SystemParam; goal g: app::Timer: SystemParam;");
        let timer = Type::ctor(c.symbol_by_path("app::Timer").unwrap(), vec![]);
        assert_eq!(pretty_print(&timer, PrintMode::FullyQualified, &c), "app::Timer");
        assert_eq!(
            pretty_print(&c.goals[0].predicate, PrintMode::Shortened, &c),
            "Timer: SystemParam"
        );
    }

    #[test]
    fn function_items_and_projections() {
        let c = ctx(
            "mod app { newtype Timer = unit; newtype run_timer = fn(Timer); }\n\
             trait Tr<X> { type Out; }\n\
             goal a: app::run_timer: Tr<app::Timer>;\n\
             goal b: <app::Timer as Tr<app::Timer>>::Out == unit;",
        );
        assert_eq!(pretty_print(&c.goals[0].predicate, PrintMode::Shortened, &c), "{run_timer}: Tr<..>");
        assert_eq!(
            pretty_print(&c.goals[0].predicate, PrintMode::FullyQualified, &c),
            "fn(app::Timer) {app::run_timer}: Tr<app::Timer>"
        );
        assert_eq!(pretty_print(&c.goals[1].predicate, PrintMode::Shortened, &c), "<Timer as Tr<..>>::Out == ()");
    }

    #[test]
    fn render_round_trips_fixture_like_source() {
        let src = "\
extern mod bevy {
    trait Resource;
    newtype ResMut<T> = unit;
    trait SystemParam { type Item; }
    impl<T> SystemParam for ResMut<T> where T: Resource { type Item = Self; }
    #[callable(arity = 1)] trait FnMut1<A>;
}
mod app {
    newtype Timer = unit;
    newtype T = unit;
    impl ::bevy::Resource for Timer;
    newtype run_timer = fn(&'a mut Timer, (T, dyn ::bevy::Resource + 'static)) -> unit;
    mod bevy { newtype Resource = unit; }
}
goal g: app::run_timer: bevy::FnMut1<?0>;
";
        let c = ctx(src);
        let rendered = render_context(&c);
        let back = parse_context(&rendered, "t.tl", Provenance::Local).unwrap_or_else(|e| panic!("{e}\n{rendered}"));
        assert_eq!(back.without_spans(), c.without_spans(), "{rendered}");
    }
}
