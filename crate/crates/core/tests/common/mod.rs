//! Generators and oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use traitscope::engine::{BuiltIn, EvalResult, ImplRef, Node, NodeId, NodeKind, ProofTree, Reason, ResultValue};
use traitscope::inertia::Formula;
use traitscope::lang::{parse_context, Context, ImplId, Predicate, Provenance, Substitution, SymbolId, Type};

pub fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> Context {
    let src = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_context(&src, name, Provenance::Local).unwrap()
}

pub const SUITE: [&str; 6] = ["bevy.tl", "diesel.tl", "ast.tl", "axum.tl", "brew.tl", "space.tl"];

// ---------------------------------------------------------------------------
// Random programs. Terms are kept in a representation of their own so the
// oracle below shares no code with the engine.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Ctor(&'static str, Vec<Term>),
    Var(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pred {
    Bound { self_ty: Term, tr: &'static str, args: Vec<Term> },
    Outlives(Term),
}

#[derive(Clone, Debug)]
pub struct Impl {
    pub params: Vec<&'static str>,
    pub tr: &'static str,
    pub self_ty: Term,
    pub args: Vec<Term>,
    pub wheres: Vec<Pred>,
}

#[derive(Clone, Debug)]
pub struct Program {
    /// Symbol name → module path it lives in ("" for the root).
    pub modules: HashMap<&'static str, &'static str>,
    pub externs: Vec<&'static str>,
    pub impls: Vec<Impl>,
    pub goal: Pred,
}

const CTORS: [(&str, usize); 4] = [("A", 0), ("B", 0), ("W", 1), ("P", 2)];
const TRAITS: [(&str, usize); 3] = [("Tr0", 0), ("Tr1", 0), ("Rel", 1)];
const PARAMS: [&str; 2] = ["T", "U"];
const MODULES: [&str; 3] = ["", "m", "lib::inner"];

fn arity(name: &str) -> usize {
    CTORS.iter().chain(TRAITS.iter()).find(|(n, _)| *n == name).unwrap().1
}

fn term(rng: &mut impl Rng, depth: usize, vars: &[&'static str]) -> Term {
    if !vars.is_empty() && rng.gen_bool(0.35) {
        return Term::Var(vars.choose(rng).unwrap());
    }
    let choices: Vec<_> = CTORS.iter().filter(|(_, a)| depth > 1 || *a == 0).collect();
    let (name, n) = **choices.choose(rng).unwrap();
    Term::Ctor(name, (0..n).map(|_| term(rng, depth - 1, vars)).collect())
}

fn bound(rng: &mut impl Rng, depth: usize, vars: &[&'static str]) -> Pred {
    let (tr, n) = *TRAITS.choose(rng).unwrap();
    Pred::Bound {
        self_ty: term(rng, depth, vars),
        tr,
        args: (0..n).map(|_| term(rng, depth, vars)).collect(),
    }
}

fn vars_of(t: &Term, out: &mut Vec<&'static str>) {
    match t {
        Term::Var(v) => {
            if !out.contains(v) {
                out.push(v)
            }
        }
        Term::Ctor(_, args) => args.iter().for_each(|a| vars_of(a, out)),
    }
}

pub fn random_impl(rng: &mut impl Rng) -> Impl {
    let Pred::Bound { self_ty, tr, args } = bound(rng, 2, &PARAMS) else {
        unreachable!()
    };
    let mut params = Vec::new();
    vars_of(&self_ty, &mut params);
    args.iter().for_each(|a| vars_of(a, &mut params));
    let wheres = (0..rng.gen_range(0..=2))
        .map(|_| {
            if rng.gen_bool(0.1) {
                Pred::Outlives(term(rng, 2, &params))
            } else {
                bound(rng, 2, &params)
            }
        })
        .collect();
    Impl {
        params,
        tr,
        self_ty,
        args,
        wheres,
    }
}

/// A program with up to four impls and a ground goal of depth at most 3.
pub fn random_program(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modules = HashMap::new();
    for (name, _) in CTORS.iter().chain(TRAITS.iter()) {
        modules.insert(*name, *MODULES.choose(&mut rng).unwrap());
    }
    let externs = CTORS
        .iter()
        .chain(TRAITS.iter())
        .map(|(n, _)| *n)
        .filter(|_| rng.gen_bool(0.3))
        .collect();
    let impls = (0..rng.gen_range(0..=4)).map(|_| random_impl(&mut rng)).collect();
    let goal = bound(&mut rng, 3, &[]);
    Program {
        modules,
        externs,
        impls,
        goal,
    }
}

impl Program {
    fn path(&self, name: &str) -> String {
        match self.modules[name] {
            "" => format!("::{name}"),
            m => format!("::{m}::{name}"),
        }
    }

    fn term_src(&self, t: &Term) -> String {
        match t {
            Term::Var(v) => v.to_string(),
            Term::Ctor(name, args) if args.is_empty() => self.path(name),
            Term::Ctor(name, args) => {
                let args: Vec<String> = args.iter().map(|a| self.term_src(a)).collect();
                format!("{}<{}>", self.path(name), args.join(", "))
            }
        }
    }

    fn pred_src(&self, p: &Pred) -> String {
        match p {
            Pred::Outlives(t) => format!("{}: 'static", self.term_src(t)),
            Pred::Bound { self_ty, tr, args } if args.is_empty() => {
                format!("{}: {}", self.term_src(self_ty), self.path(tr))
            }
            Pred::Bound { self_ty, tr, args } => {
                let args: Vec<String> = args.iter().map(|a| self.term_src(a)).collect();
                format!("{}: {}<{}>", self.term_src(self_ty), self.path(tr), args.join(", "))
            }
        }
    }

    pub fn source(&self) -> String {
        let mut out = String::new();
        for (name, n) in CTORS.iter().chain(TRAITS.iter()) {
            let ext = if self.externs.contains(name) { "extern " } else { "" };
            let params: Vec<String> = (0..*n).map(|i| format!("X{i}")).collect();
            let params = if params.is_empty() {
                String::new()
            } else {
                format!("<{}>", params.join(", "))
            };
            let decl = if TRAITS.iter().any(|(t, _)| t == name) {
                format!("trait {name}{params};")
            } else {
                format!("newtype {name}{params} = unit;")
            };
            match self.modules[name] {
                "" => out.push_str(&format!("{ext}{decl}\n")),
                m => {
                    let parts: Vec<&str> = m.split("::").collect();
                    let open: String = parts.iter().map(|p| format!("mod {p} {{ ")).collect();
                    out.push_str(&format!("{ext}{open}{decl}{}\n", " }".repeat(parts.len())));
                }
            }
        }
        for imp in &self.impls {
            let binders = if imp.params.is_empty() {
                String::new()
            } else {
                format!("<{}>", imp.params.join(", "))
            };
            let head = self.pred_src(&Pred::Bound {
                self_ty: imp.self_ty.clone(),
                tr: imp.tr,
                args: imp.args.clone(),
            });
            let (self_src, trait_src) = head.split_once(": ").unwrap();
            let wheres: Vec<String> = imp.wheres.iter().map(|w| self.pred_src(w)).collect();
            let wheres = if wheres.is_empty() {
                String::new()
            } else {
                format!(" where {}", wheres.join(", "))
            };
            out.push_str(&format!("impl{binders} {trait_src} for {self_src}{wheres};\n"));
        }
        out.push_str(&format!("goal g: {};\n", self.pred_src(&self.goal)));
        out
    }

    pub fn context(&self) -> Context {
        let src = self.source();
        parse_context(&src, "random.tl", Provenance::Local).unwrap_or_else(|e| panic!("{e}\n{src}"))
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracle: enumerate every impl choice, three-valued.

fn matches(pat: &Term, ground: &Term, env: &mut HashMap<&'static str, Term>) -> bool {
    match (pat, ground) {
        (Term::Var(v), g) => match env.get(v) {
            Some(bound) => bound == g,
            None => {
                env.insert(v, g.clone());
                true
            }
        },
        (Term::Ctor(a, xs), Term::Ctor(b, ys)) => {
            a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| matches(x, y, env))
        }
        (Term::Ctor(..), Term::Var(_)) => false,
    }
}

fn instantiate(t: &Term, env: &HashMap<&'static str, Term>) -> Term {
    match t {
        Term::Var(v) => env[v].clone(),
        Term::Ctor(n, args) => Term::Ctor(n, args.iter().map(|a| instantiate(a, env)).collect()),
    }
}

fn instantiate_pred(p: &Pred, env: &HashMap<&'static str, Term>) -> Pred {
    match p {
        Pred::Outlives(t) => Pred::Outlives(instantiate(t, env)),
        Pred::Bound { self_ty, tr, args } => Pred::Bound {
            self_ty: instantiate(self_ty, env),
            tr,
            args: args.iter().map(|a| instantiate(a, env)).collect(),
        },
    }
}

/// Yes if some impl choice proves the goal, No if every choice is refuted,
/// Maybe when only cut branches (repeats or depth) remain.
pub fn oracle(program: &Program, max_depth: usize) -> ResultValue {
    fn go(p: &Program, goal: &Pred, depth: usize, max: usize, path: &mut Vec<Pred>) -> ResultValue {
        if path.contains(goal) || depth > max {
            return ResultValue::Maybe;
        }
        let Pred::Bound { self_ty, tr, args } = goal else {
            return ResultValue::Yes;
        };
        path.push(goal.clone());
        let mut best = ResultValue::No;
        for imp in p.impls.iter().filter(|i| i.tr == *tr) {
            let mut env = HashMap::new();
            let head_ok = matches(&imp.self_ty, self_ty, &mut env)
                && imp.args.iter().zip(args).all(|(x, y)| matches(x, y, &mut env));
            if !head_ok {
                continue;
            }
            let mut cand = ResultValue::Yes;
            for w in &imp.wheres {
                cand = cand.min(go(p, &instantiate_pred(w, &env), depth + 1, max, path));
            }
            best = best.max(cand);
        }
        path.pop();
        best
    }
    go(program, &program.goal, 0, max_depth, &mut Vec::new())
}

// ---------------------------------------------------------------------------
// Random formulas over at most `vars` variables.

pub fn random_formula(rng: &mut impl Rng, vars: u32, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return Formula::Var(NodeId(rng.gen_range(0..vars)));
    }
    let parts = (0..rng.gen_range(1..=3)).map(|_| random_formula(rng, vars, depth - 1)).collect();
    if rng.gen_bool(0.5) {
        Formula::And(parts)
    } else {
        Formula::Or(parts)
    }
}

// ---------------------------------------------------------------------------
// Synthetic failing trees of a requested size, shaped like real ones: most
// goals hold, failures run down a few branches.

pub fn synthetic_tree(seed: u64, target: usize) -> ProofTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder { nodes: Vec::new() };
    let trait_id = SymbolId(0);
    let pred = |i: usize| Predicate::trait_bound(Type::Unit, trait_id, vec![Type::infer(i as u32 % 7)]);
    let pred = &pred;
    b.goal(&mut rng, None, 0, false, target, pred);
    ProofTree { nodes: b.nodes }
}

struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    fn push(&mut self, parent: Option<NodeId>, depth: usize, kind: NodeKind, result: EvalResult) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            parent,
            depth,
            result,
            children: Vec::new(),
            kind,
        });
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        id
    }

    /// Builds a goal subtree of roughly `budget` nodes.
    fn goal(
        &mut self,
        rng: &mut ChaCha8Rng,
        parent: Option<NodeId>,
        depth: usize,
        holds: bool,
        budget: usize,
        pred: &dyn Fn(usize) -> Predicate,
    ) -> ResultValue {
        let predicate = if holds {
            Predicate::trait_bound(Type::Unit, SymbolId(0), vec![])
        } else {
            pred(self.nodes.len())
        };
        let g = self.push(
            parent,
            depth,
            NodeKind::Goal { predicate, stale: false },
            EvalResult::no(Reason::None),
        );
        if budget <= 2 {
            let result = if holds {
                let c = self.push(
                    Some(g),
                    depth,
                    NodeKind::Candidate {
                        impl_ref: ImplRef::Impl(ImplId(0)),
                        unifier: Substitution::new(),
                    },
                    EvalResult::yes(),
                );
                let _ = c;
                EvalResult::yes()
            } else {
                EvalResult::no(Reason::NoCandidates)
            };
            self.nodes[g.index()].result = result.clone();
            return result.value;
        }
        let cands = if holds { 1 } else { rng.gen_range(1..=3) };
        let mut rest = budget - 1;
        let mut best = ResultValue::No;
        for k in 0..cands {
            let share = if k + 1 == cands { rest } else { rest / (cands - k) };
            rest -= share;
            let c = self.push(
                Some(g),
                depth,
                NodeKind::Candidate {
                    impl_ref: ImplRef::BuiltIn(BuiltIn::Callable),
                    unifier: Substitution::new(),
                },
                EvalResult::yes(),
            );
            let subs = rng.gen_range(1..=4).min(share.max(1));
            let failing: Vec<bool> = if holds {
                vec![false; subs]
            } else {
                let mut f: Vec<bool> = (0..subs).map(|_| rng.gen_bool(0.12)).collect();
                let pick = rng.gen_range(0..subs);
                f[pick] = true;
                f
            };
            let mut inner = share.saturating_sub(1);
            let mut cand = ResultValue::Yes;
            for (j, fails) in failing.iter().enumerate() {
                let part = if j + 1 == subs { inner } else { inner / (subs - j) };
                inner -= part;
                let v = self.goal(rng, Some(c), depth + 1, !fails, part.max(1), pred);
                cand = cand.min(v);
            }
            self.nodes[c.index()].result = match cand {
                ResultValue::Yes => EvalResult::yes(),
                v => EvalResult {
                    value: v,
                    reason: Reason::None,
                },
            };
            best = best.max(cand);
        }
        let result = match best {
            ResultValue::Yes => EvalResult::yes(),
            v => EvalResult {
                value: v,
                reason: Reason::None,
            },
        };
        self.nodes[g.index()].result = result;
        best
    }
}

/// The first synthetic tree whose size is within `tolerance` of `nodes`.
pub fn synthetic_tree_near(nodes: usize, tolerance: usize) -> ProofTree {
    for seed in 0..64 {
        let mut target = nodes;
        for _ in 0..8 {
            let tree = synthetic_tree(seed, target);
            if tree.len().abs_diff(nodes) <= tolerance {
                return tree;
            }
            target = target * nodes / tree.len().max(1);
        }
    }
    panic!("no synthetic tree of {nodes}±{tolerance} nodes");
}
