//! Goal evaluation producing complete And-Or trees.
//!
//! Every candidate is explored even after one succeeds, so the tree shows
//! every way a goal could have been proven. Searches are cut when a goal
//! repeats (up to renaming of inference variables) on the current path or
//! when the depth bound is exceeded; cut goals are `maybe` with an
//! overflow reason.

use std::collections::HashMap;

use crate::lang::{
    canonicalize, unify, unify_lists, Context, ImplDecl, ImplId, Predicate, Projection, Substitute, Substitution,
    TraitInstance, Type,
};

use super::tree::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    /// Goals nested deeper than this are cut with an overflow.
    pub max_depth: usize,
    /// Drop superseded evaluations of re-solved goals instead of keeping
    /// them as stale siblings.
    pub dedup_snapshots: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_depth: 64,
            dedup_snapshots: true,
        }
    }
}

/// Bound on where-clause re-evaluation rounds within one candidate.
const MAX_FIXPOINT_ROUNDS: usize = 16;

/// Solves `predicate` and returns the full inference tree.
pub fn solve(ctx: &Context, predicate: &Predicate, config: &SolveConfig) -> ProofTree {
    let mut solver = Solver::new(ctx, config, predicate);
    solver.goal(predicate.clone(), 0, None);
    solver.finish()
}

/// Evaluates a single predicate, dispatching on its kind: trait bounds go
/// through candidate assembly, outlives bounds hold by assumption and
/// projection equalities normalize their left side.
pub fn evaluate_predicate_kind(ctx: &Context, predicate: &Predicate, config: &SolveConfig) -> ProofTree {
    solve(ctx, predicate, config)
}

/// Impls of `bound`'s trait whose head unifies with `bound`, in declaration
/// order, each with its head unifier. Impl binders are instantiated with
/// fresh inference variables numbered above those in `bound`.
pub fn assemble_candidates(ctx: &Context, bound: &Predicate) -> Vec<(ImplId, Substitution)> {
    let Predicate::TraitBound { self_ty, instance } = bound else {
        return Vec::new();
    };
    let config = SolveConfig::default();
    let mut solver = Solver::new(ctx, &config, bound);
    let mut out = Vec::new();
    for (imp, _) in ctx.impls_of(instance.trait_id) {
        let mark = solver.next_var;
        let inst = solver.instantiate(imp);
        match head_unifier(self_ty, instance, &inst) {
            Some(s) => out.push((imp.id, s)),
            None => solver.next_var = mark,
        }
    }
    out
}

/// Normalizes one projection step. Returns the bound type when the
/// projection's trait bound has exactly one successful candidate, together
/// with the evidence tree for that bound. Projections remaining in the
/// bound type are normalized further; the tree covers the first step.
pub fn normalize_projection(ctx: &Context, projection: &Projection, config: &SolveConfig) -> (Option<Type>, ProofTree) {
    let bound = projection.trait_bound();
    let mut solver = Solver::new(ctx, config, &bound);
    let mut s = Substitution::new();
    let ty = solver.normalize_step(projection, None, 0, &mut s);
    let tree = solver.finish();
    let ty = ty.and_then(|ty| {
        if !has_projection(&ty) {
            return Some(ty);
        }
        let mut remaining = config.max_depth;
        normalize_fully(ctx, config, &ty, &mut remaining)
    });
    (ty, tree)
}

fn normalize_fully(ctx: &Context, config: &SolveConfig, ty: &Type, fuel: &mut usize) -> Option<Type> {
    map_type(ty, &mut |p| {
        if *fuel == 0 {
            return None;
        }
        *fuel -= 1;
        let (next, _) = normalize_projection(ctx, p, config);
        let next = next?;
        if has_projection(&next) {
            normalize_fully(ctx, config, &next, fuel)
        } else {
            Some(next)
        }
    })
}

// ---------------------------------------------------------------------------

struct Outcome {
    id: NodeId,
    value: ResultValue,
    /// Bindings for the goal's inference variables, present when exactly
    /// one candidate did not fail and it succeeded.
    bindings: Option<Substitution>,
}

struct Instantiated {
    params: HashMap<String, Type>,
    self_ty: Type,
    instance: TraitInstance,
    where_clauses: Vec<Predicate>,
}

struct Slot {
    template: Predicate,
    applied: Predicate,
    node: NodeId,
    value: ResultValue,
}

struct Solver<'c> {
    ctx: &'c Context,
    config: &'c SolveConfig,
    next_var: u32,
    nodes: Vec<Node>,
    dead: Vec<bool>,
    /// Canonical predicates of the goals on the current search path.
    path: Vec<(Predicate, NodeId)>,
    /// Binder instantiation of each impl candidate, for projection
    /// normalization.
    instantiations: HashMap<NodeId, HashMap<String, Type>>,
}

impl<'c> Solver<'c> {
    fn new(ctx: &'c Context, config: &'c SolveConfig, seed: &Predicate) -> Self {
        let next_var = seed.infer_vars().iter().map(|v| v.0 + 1).max().unwrap_or(0);
        Solver {
            ctx,
            config,
            next_var,
            nodes: Vec::new(),
            dead: Vec::new(),
            path: Vec::new(),
            instantiations: HashMap::new(),
        }
    }

    fn fresh(&mut self) -> Type {
        let t = Type::infer(self.next_var);
        self.next_var += 1;
        t
    }

    fn push(&mut self, kind: NodeKind, parent: Option<NodeId>, depth: usize) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            parent,
            depth,
            result: EvalResult::maybe(Reason::None),
            children: Vec::new(),
            kind,
        });
        self.dead.push(false);
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        id
    }

    fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    fn live_children(&self, id: NodeId) -> Vec<NodeId> {
        self.node(id)
            .children
            .iter()
            .copied()
            .filter(|c| !self.node(*c).is_stale())
            .collect()
    }

    fn set_result(&mut self, id: NodeId, result: EvalResult) {
        self.nodes[id.index()].result = result;
    }

    fn unifier(&self, id: NodeId) -> &Substitution {
        match &self.node(id).kind {
            NodeKind::Candidate { unifier, .. } => unifier,
            NodeKind::Goal { .. } => unreachable!("goals carry no unifier"),
        }
    }

    fn set_unifier(&mut self, id: NodeId, s: Substitution) {
        if let NodeKind::Candidate { unifier, .. } = &mut self.nodes[id.index()].kind {
            *unifier = s;
        }
    }

    fn candidate(&mut self, impl_ref: ImplRef, unifier: Substitution, goal: NodeId) -> NodeId {
        let depth = self.node(goal).depth;
        self.push(NodeKind::Candidate { impl_ref, unifier }, Some(goal), depth)
    }

    // -- goals --------------------------------------------------------------

    fn goal(&mut self, pred: Predicate, depth: usize, parent: Option<NodeId>) -> Outcome {
        let id = self.push(
            NodeKind::Goal {
                predicate: pred.clone(),
                stale: false,
            },
            parent,
            depth,
        );
        let canon = canonicalize(&pred);
        if let Some(pos) = self.path.iter().position(|(c, _)| *c == canon) {
            let mut cycle: Vec<NodeId> = self.path[pos..].iter().map(|(_, g)| *g).collect();
            cycle.push(id);
            return self.cut(id, cycle);
        }
        if depth > self.config.max_depth {
            return self.cut(id, vec![id]);
        }

        self.path.push((canon, id));
        match &pred {
            Predicate::Outlives { .. } => {
                let c = self.candidate(ImplRef::BuiltIn(BuiltIn::OutlivesAssumed), Substitution::new(), id);
                self.set_result(c, EvalResult::yes());
            }
            Predicate::ProjectionEq { projection, rhs } => self.projection_eq(id, projection, rhs),
            Predicate::TraitBound { .. } if needs_normalization(&pred) => self.normalize_bound(id, &pred),
            Predicate::TraitBound { self_ty, instance } => {
                self.existential_candidates(id, self_ty, instance);
                self.callable_candidate(id, self_ty, instance);
                self.impl_candidates(id, self_ty, instance);
            }
        }
        self.path.pop();
        self.finish_goal(id, &pred)
    }

    fn cut(&mut self, id: NodeId, cycle_path: Vec<NodeId>) -> Outcome {
        self.set_result(id, EvalResult::maybe(Reason::Overflow { cycle_path }));
        Outcome {
            id,
            value: ResultValue::Maybe,
            bindings: None,
        }
    }

    fn finish_goal(&mut self, id: NodeId, pred: &Predicate) -> Outcome {
        let cands = self.live_children(id);
        let value_of = |c: &NodeId| self.node(*c).result.value;
        let non_failing: Vec<NodeId> = cands.iter().copied().filter(|c| value_of(c) != ResultValue::No).collect();
        let bindings = match non_failing.as_slice() {
            [only] if value_of(only) == ResultValue::Yes => Some(self.unifier(*only).restrict(&pred.infer_vars())),
            _ => None,
        };

        let result = if cands.iter().any(|c| value_of(c) == ResultValue::Yes) {
            let instantiated = match &bindings {
                Some(b) => pred.apply(b),
                None => pred.clone(),
            };
            let vars = instantiated.infer_vars();
            if vars.is_empty() {
                if let NodeKind::Goal { predicate, .. } = &mut self.nodes[id.index()].kind {
                    *predicate = instantiated;
                }
                EvalResult::yes()
            } else {
                EvalResult::maybe(Reason::Ambiguous { vars })
            }
        } else if let Some(m) = cands.iter().find(|c| value_of(c) == ResultValue::Maybe) {
            EvalResult::maybe(self.node(*m).result.reason.clone())
        } else if cands.is_empty() {
            EvalResult::no(Reason::NoCandidates)
        } else {
            match cands.as_slice() {
                [only] if matches!(self.node(*only).result.reason, Reason::TypeMismatch { .. }) => {
                    EvalResult::no(self.node(*only).result.reason.clone())
                }
                _ => EvalResult::no(Reason::None),
            }
        };
        let value = result.value;
        self.set_result(id, result);
        Outcome { id, value, bindings }
    }

    /// Conjunction over a candidate's live subgoals.
    fn and_result(&self, cand: NodeId) -> EvalResult {
        let mut maybe = None;
        for g in self.live_children(cand) {
            let r = &self.node(g).result;
            match r.value {
                ResultValue::No => return EvalResult::no(Reason::None),
                ResultValue::Maybe if maybe.is_none() => maybe = Some(r.reason.clone()),
                _ => {}
            }
        }
        match maybe {
            Some(reason) => EvalResult::maybe(reason),
            None => EvalResult::yes(),
        }
    }

    // -- candidates ---------------------------------------------------------

    fn instantiate(&mut self, imp: &ImplDecl) -> Instantiated {
        let mut params = HashMap::new();
        for name in &imp.params.types {
            let v = self.fresh();
            params.insert(name.clone(), v);
        }
        Instantiated {
            self_ty: subst_params(&imp.self_ty, &params),
            instance: subst_instance(&imp.instance, &params),
            where_clauses: imp
                .params
                .where_clauses
                .iter()
                .map(|p| subst_pred(p, &params))
                .collect(),
            params,
        }
    }

    fn impl_candidates(&mut self, goal: NodeId, self_ty: &Type, instance: &TraitInstance) {
        let ctx = self.ctx;
        for (imp, _) in ctx.impls_of(instance.trait_id) {
            let mark = self.next_var;
            let inst = self.instantiate(imp);
            let Some(s) = head_unifier(self_ty, instance, &inst) else {
                self.next_var = mark;
                continue;
            };
            let c = self.candidate(ImplRef::Impl(imp.id), s.clone(), goal);
            self.instantiations.insert(c, inst.params);
            self.run_where_clauses(c, s, inst.where_clauses);
        }
    }

    fn existential_candidates(&mut self, goal: NodeId, self_ty: &Type, instance: &TraitInstance) {
        let Type::Existential { binder, bounds } = self_ty else {
            return;
        };
        for b in bounds {
            let Predicate::TraitBound {
                self_ty: Type::Param { name },
                instance: inner,
            } = b
            else {
                continue;
            };
            if name != binder || inner.trait_id != instance.trait_id {
                continue;
            }
            if let Ok(s) = unify_lists(&instance.type_args, &inner.type_args, &Substitution::new()) {
                let c = self.candidate(ImplRef::BuiltIn(BuiltIn::Existential), s, goal);
                self.set_result(c, EvalResult::yes());
            }
        }
    }

    fn callable_candidate(&mut self, goal: NodeId, self_ty: &Type, instance: &TraitInstance) {
        let Some((decl, _)) = self.ctx.trait_decl(instance.trait_id) else {
            return;
        };
        let Some(n) = decl.callable else {
            return;
        };
        let signature = match self_ty {
            Type::Ctor { head, args } if args.is_empty() => match self.ctx.newtype(*head) {
                Some((nt, _)) if self.ctx.fn_item_arity(*head).is_some() => nt.body.clone(),
                _ => return,
            },
            Type::Function { .. } => self_ty.clone(),
            _ => return,
        };
        let Some((params, result)) = signature.surface_signature() else {
            return;
        };
        if params.len() != n || instance.type_args.len() < n {
            return;
        }
        let params: Vec<Type> = params.into_iter().cloned().collect();
        let mut s = match unify_lists(&instance.type_args[..n], &params, &Substitution::new()) {
            Ok(s) => s,
            Err(_) => return,
        };
        if let Some(ret) = instance.type_args.get(n) {
            match unify(ret, result, &s) {
                Ok(s2) => s = s2,
                Err(_) => return,
            }
        }
        let c = self.candidate(ImplRef::BuiltIn(BuiltIn::Callable), s, goal);
        self.set_result(c, EvalResult::yes());
    }

    /// Evaluates where clauses in order under the growing substitution,
    /// then re-evaluates ambiguous ones whose instantiation has changed
    /// until nothing changes.
    fn run_where_clauses(&mut self, cand: NodeId, mut s: Substitution, wheres: Vec<Predicate>) {
        let depth = self.node(cand).depth + 1;
        let mut slots = Vec::with_capacity(wheres.len());
        for wc in wheres {
            let applied = wc.apply(&s);
            let out = self.goal(applied.clone(), depth, Some(cand));
            if let Some(b) = &out.bindings {
                s = s.compose(b);
            }
            slots.push(Slot {
                template: wc,
                applied,
                node: out.id,
                value: out.value,
            });
        }
        for _ in 0..MAX_FIXPOINT_ROUNDS {
            let mut changed = false;
            for slot in slots.iter_mut() {
                if slot.value != ResultValue::Maybe {
                    continue;
                }
                let applied = slot.template.apply(&s);
                if applied == slot.applied {
                    continue;
                }
                let out = self.goal(applied.clone(), depth, Some(cand));
                self.supersede(cand, slot.node, out.id);
                if let Some(b) = &out.bindings {
                    s = s.compose(b);
                }
                slot.applied = applied;
                slot.node = out.id;
                slot.value = out.value;
                changed = true;
            }
            if !changed {
                break;
            }
        }
        self.set_unifier(cand, s);
        let result = self.and_result(cand);
        self.set_result(cand, result);
    }

    /// Puts `new` (just appended to `cand`'s children) in the place of
    /// `old`, dropping `old` or keeping it as a stale snapshot.
    fn supersede(&mut self, cand: NodeId, old: NodeId, new: NodeId) {
        let children = &mut self.nodes[cand.index()].children;
        let appended = children.pop();
        debug_assert_eq!(appended, Some(new));
        let pos = children.iter().position(|c| *c == old).expect("superseded goal is a child");
        if self.config.dedup_snapshots {
            children[pos] = new;
            self.kill(old);
        } else {
            children.insert(pos + 1, new);
            if let NodeKind::Goal { stale, .. } = &mut self.nodes[old.index()].kind {
                *stale = true;
            }
        }
    }

    fn kill(&mut self, id: NodeId) {
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            self.dead[n.index()] = true;
            stack.extend(self.nodes[n.index()].children.iter().copied());
        }
    }

    // -- projections --------------------------------------------------------

    fn normalize_bound(&mut self, goal: NodeId, pred: &Predicate) {
        let c = self.candidate(ImplRef::BuiltIn(BuiltIn::Normalize), Substitution::new(), goal);
        let depth = self.node(goal).depth + 1;
        let mut s = Substitution::new();
        let mut fuel = self.config.max_depth;
        let normalized = self.normalize_pred(pred, c, depth, &mut s, &mut fuel);
        let result = match normalized {
            Some(np) => {
                let out = self.goal(np.apply(&s), depth, Some(c));
                if let Some(b) = &out.bindings {
                    s = s.compose(b);
                }
                self.and_result(c)
            }
            None => self.unresolved(c, goal, pred, fuel),
        };
        self.set_unifier(c, s);
        self.set_result(c, result);
    }

    fn projection_eq(&mut self, goal: NodeId, projection: &Projection, rhs: &Type) {
        let c = self.candidate(ImplRef::BuiltIn(BuiltIn::NormalizesTo), Substitution::new(), goal);
        if *rhs == Type::Projection(Box::new(projection.clone())) {
            self.set_result(c, EvalResult::yes());
            return;
        }
        let depth = self.node(goal).depth + 1;
        let mut s = Substitution::new();
        let mut fuel = self.config.max_depth;
        let lhs = self.normalize_one(projection, Some(c), depth, &mut s, &mut fuel);
        let rhs_n = match lhs {
            Some(_) if has_projection(rhs) => self.normalize_type(rhs, c, depth, &mut s, &mut fuel),
            Some(_) => Some(rhs.clone()),
            None => None,
        };
        let result = match (lhs, rhs_n) {
            (Some(l), Some(r)) => {
                let (l, r) = (l.apply(&s), r.apply(&s));
                let evidence = self.and_result(c);
                match unify(&l, &r, &s) {
                    Ok(s2) => {
                        s = s2;
                        evidence
                    }
                    Err(_) if evidence.value == ResultValue::No => evidence,
                    Err(_) => EvalResult::no(Reason::TypeMismatch { expected: r, found: l }),
                }
            }
            _ => {
                let pred = self.node(goal).predicate().cloned().expect("goal");
                self.unresolved(c, goal, &pred, fuel)
            }
        };
        self.set_unifier(c, s);
        self.set_result(c, result);
    }

    /// Result of a normalizing candidate whose projection did not resolve.
    fn unresolved(&self, cand: NodeId, goal: NodeId, pred: &Predicate, fuel: usize) -> EvalResult {
        let evidence = self.and_result(cand);
        if evidence.value == ResultValue::No {
            evidence
        } else if fuel == 0 {
            EvalResult::maybe(Reason::Overflow { cycle_path: vec![goal] })
        } else if evidence.value == ResultValue::Maybe {
            evidence
        } else {
            EvalResult::maybe(Reason::Ambiguous {
                vars: pred.infer_vars(),
            })
        }
    }

    fn normalize_pred(
        &mut self,
        pred: &Predicate,
        cand: NodeId,
        depth: usize,
        s: &mut Substitution,
        fuel: &mut usize,
    ) -> Option<Predicate> {
        Some(match pred {
            Predicate::TraitBound { self_ty, instance } => {
                let self_ty = self.normalize_type(self_ty, cand, depth, s, fuel)?;
                let mut args = Vec::with_capacity(instance.type_args.len());
                for a in &instance.type_args {
                    args.push(self.normalize_type(a, cand, depth, s, fuel)?);
                }
                Predicate::TraitBound {
                    self_ty,
                    instance: TraitInstance {
                        trait_id: instance.trait_id,
                        type_args: args,
                        region_args: instance.region_args.clone(),
                    },
                }
            }
            Predicate::Outlives { self_ty, region } => Predicate::Outlives {
                self_ty: self.normalize_type(self_ty, cand, depth, s, fuel)?,
                region: region.clone(),
            },
            Predicate::ProjectionEq { .. } => pred.clone(),
        })
    }

    /// Replaces every projection outside `dyn` types with its normal form.
    fn normalize_type(
        &mut self,
        ty: &Type,
        cand: NodeId,
        depth: usize,
        s: &mut Substitution,
        fuel: &mut usize,
    ) -> Option<Type> {
        if !has_projection(ty) {
            return Some(ty.clone());
        }
        Some(match ty {
            Type::Projection(p) => return self.normalize_one(p, Some(cand), depth, s, fuel),
            Type::Ref { region, mutable, inner } => Type::Ref {
                region: region.clone(),
                mutable: *mutable,
                inner: Box::new(self.normalize_type(inner, cand, depth, s, fuel)?),
            },
            Type::Ctor { head, args } => {
                let mut out = Vec::with_capacity(args.len());
                for a in args {
                    out.push(self.normalize_type(a, cand, depth, s, fuel)?);
                }
                Type::Ctor { head: *head, args: out }
            }
            Type::Tuple { left, right } => Type::tuple(
                self.normalize_type(left, cand, depth, s, fuel)?,
                self.normalize_type(right, cand, depth, s, fuel)?,
            ),
            Type::Function { param, result, arity } => Type::Function {
                param: Box::new(self.normalize_type(param, cand, depth, s, fuel)?),
                result: Box::new(self.normalize_type(result, cand, depth, s, fuel)?),
                arity: *arity,
            },
            _ => ty.clone(),
        })
    }

    fn normalize_one(
        &mut self,
        p: &Projection,
        parent: Option<NodeId>,
        depth: usize,
        s: &mut Substitution,
        fuel: &mut usize,
    ) -> Option<Type> {
        if *fuel == 0 {
            return None;
        }
        *fuel -= 1;
        let ty = self.normalize_step(p, parent, depth, s)?;
        match parent {
            Some(cand) if has_projection(&ty) => self.normalize_type(&ty, cand, depth, s, fuel),
            _ => Some(ty),
        }
    }

    /// Solves the projection's trait bound as evidence and, if a single impl
    /// succeeds, returns its binding for the associated type.
    fn normalize_step(
        &mut self,
        p: &Projection,
        parent: Option<NodeId>,
        depth: usize,
        s: &mut Substitution,
    ) -> Option<Type> {
        let p = p.apply(s);
        let out = self.goal(p.trait_bound(), depth, parent);
        if let Some(b) = &out.bindings {
            *s = s.compose(b);
        }
        let cand = self.unique_impl_candidate(out.id)?;
        let Some(ImplRef::Impl(impl_id)) = self.node(cand).impl_ref() else {
            return None;
        };
        let (imp, _) = self.ctx.impl_decl(impl_id)?;
        let binding = imp.bindings.iter().find(|b| b.assoc == p.assoc)?;
        let mut params = self.instantiations.get(&cand).cloned().unwrap_or_default();
        for (name, arg) in binding.params.types.iter().zip(&p.type_args) {
            params.insert(name.clone(), arg.clone());
        }
        Some(subst_params(&binding.ty, &params).apply(self.unifier(cand)).apply(s))
    }

    /// The impl candidate proving `goal` when it is the only one that did
    /// not fail and it succeeded, looking through normalization.
    fn unique_impl_candidate(&self, goal: NodeId) -> Option<NodeId> {
        let non_failing: Vec<NodeId> = self
            .live_children(goal)
            .into_iter()
            .filter(|c| self.node(*c).result.value != ResultValue::No)
            .collect();
        let [only] = non_failing.as_slice() else {
            return None;
        };
        if !self.node(*only).result.is_yes() {
            return None;
        }
        match self.node(*only).impl_ref()? {
            ImplRef::Impl(_) => Some(*only),
            ImplRef::BuiltIn(BuiltIn::Normalize) => {
                let last = *self.live_children(*only).last()?;
                self.unique_impl_candidate(last)
            }
            ImplRef::BuiltIn(_) => None,
        }
    }

    // -- finishing ----------------------------------------------------------

    /// Renumbers live nodes in preorder and drops superseded ones.
    fn finish(self) -> ProofTree {
        if self.nodes.is_empty() {
            return ProofTree { nodes: Vec::new() };
        }
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![NodeId(0)];
        while let Some(n) = stack.pop() {
            if self.dead[n.index()] {
                continue;
            }
            order.push(n);
            stack.extend(self.nodes[n.index()].children.iter().rev().copied());
        }
        let mut remap = vec![None; self.nodes.len()];
        for (new, old) in order.iter().enumerate() {
            remap[old.index()] = Some(NodeId(new as u32));
        }
        let map = |id: NodeId| remap[id.index()].expect("reference to a dropped node");
        let mut nodes = Vec::with_capacity(order.len());
        for old in &order {
            let mut node = self.nodes[old.index()].clone();
            node.id = map(node.id);
            node.parent = node.parent.map(map);
            node.children = node
                .children
                .iter()
                .filter(|c| !self.dead[c.index()])
                .map(|c| map(*c))
                .collect();
            if let Reason::Overflow { cycle_path } = &mut node.result.reason {
                for id in cycle_path.iter_mut() {
                    *id = map(*id);
                }
            }
            nodes.push(node);
        }
        ProofTree { nodes }
    }
}

fn head_unifier(self_ty: &Type, instance: &TraitInstance, inst: &Instantiated) -> Option<Substitution> {
    let s = unify(self_ty, &inst.self_ty, &Substitution::new()).ok()?;
    unify_lists(&instance.type_args, &inst.instance.type_args, &s).ok()
}

/// True when `ty` has a projection outside any `dyn` type.
fn has_projection(ty: &Type) -> bool {
    match ty {
        Type::Projection(_) => true,
        Type::Unit | Type::Param { .. } | Type::Infer { .. } | Type::Existential { .. } => false,
        Type::Ref { inner, .. } => has_projection(inner),
        Type::Ctor { args, .. } => args.iter().any(has_projection),
        Type::Tuple { left, right } => has_projection(left) || has_projection(right),
        Type::Function { param, result, .. } => has_projection(param) || has_projection(result),
    }
}

fn needs_normalization(pred: &Predicate) -> bool {
    match pred {
        Predicate::TraitBound { self_ty, instance } => {
            has_projection(self_ty) || instance.type_args.iter().any(has_projection)
        }
        Predicate::Outlives { self_ty, .. } => has_projection(self_ty),
        Predicate::ProjectionEq { .. } => false,
    }
}

/// Rebuilds `ty`, replacing each outermost projection via `f`.
fn map_type(ty: &Type, f: &mut dyn FnMut(&Projection) -> Option<Type>) -> Option<Type> {
    Some(match ty {
        Type::Projection(p) => return f(p),
        Type::Ref { region, mutable, inner } => Type::Ref {
            region: region.clone(),
            mutable: *mutable,
            inner: Box::new(map_type(inner, f)?),
        },
        Type::Ctor { head, args } => Type::Ctor {
            head: *head,
            args: args.iter().map(|a| map_type(a, f)).collect::<Option<_>>()?,
        },
        Type::Tuple { left, right } => Type::tuple(map_type(left, f)?, map_type(right, f)?),
        Type::Function { param, result, arity } => Type::Function {
            param: Box::new(map_type(param, f)?),
            result: Box::new(map_type(result, f)?),
            arity: *arity,
        },
        _ => ty.clone(),
    })
}

// -- binder substitution -----------------------------------------------------

pub(crate) fn subst_params(ty: &Type, map: &HashMap<String, Type>) -> Type {
    match ty {
        Type::Param { name } => map.get(name).cloned().unwrap_or_else(|| ty.clone()),
        Type::Unit | Type::Infer { .. } => ty.clone(),
        Type::Ref { region, mutable, inner } => Type::Ref {
            region: region.clone(),
            mutable: *mutable,
            inner: Box::new(subst_params(inner, map)),
        },
        Type::Ctor { head, args } => Type::Ctor {
            head: *head,
            args: args.iter().map(|a| subst_params(a, map)).collect(),
        },
        Type::Tuple { left, right } => Type::tuple(subst_params(left, map), subst_params(right, map)),
        Type::Function { param, result, arity } => Type::Function {
            param: Box::new(subst_params(param, map)),
            result: Box::new(subst_params(result, map)),
            arity: *arity,
        },
        Type::Projection(p) => Type::Projection(Box::new(subst_projection(p, map))),
        Type::Existential { binder, bounds } => {
            let mut inner = map.clone();
            inner.remove(binder);
            Type::Existential {
                binder: binder.clone(),
                bounds: bounds.iter().map(|b| subst_pred(b, &inner)).collect(),
            }
        }
    }
}

fn subst_instance(inst: &TraitInstance, map: &HashMap<String, Type>) -> TraitInstance {
    TraitInstance {
        trait_id: inst.trait_id,
        type_args: inst.type_args.iter().map(|t| subst_params(t, map)).collect(),
        region_args: inst.region_args.clone(),
    }
}

fn subst_projection(p: &Projection, map: &HashMap<String, Type>) -> Projection {
    Projection {
        self_ty: subst_params(&p.self_ty, map),
        assoc: p.assoc,
        instance: subst_instance(&p.instance, map),
        type_args: p.type_args.iter().map(|t| subst_params(t, map)).collect(),
        region_args: p.region_args.clone(),
    }
}

pub(crate) fn subst_pred(p: &Predicate, map: &HashMap<String, Type>) -> Predicate {
    match p {
        Predicate::TraitBound { self_ty, instance } => Predicate::TraitBound {
            self_ty: subst_params(self_ty, map),
            instance: subst_instance(instance, map),
        },
        Predicate::Outlives { self_ty, region } => Predicate::Outlives {
            self_ty: subst_params(self_ty, map),
            region: region.clone(),
        },
        Predicate::ProjectionEq { projection, rhs } => Predicate::ProjectionEq {
            projection: subst_projection(projection, map),
            rhs: subst_params(rhs, map),
        },
    }
}
