use std::collections::BTreeSet;

use super::*;
use crate::engine::{solve, NodeId, ProofTree, SolveConfig};
use crate::lang::*;

fn v(i: u32) -> Formula {
    Formula::Var(NodeId(i))
}

fn set(ids: &[u32]) -> Conjunct {
    ids.iter().map(|i| NodeId(*i)).collect()
}

fn fixture(name: &str) -> (Context, ProofTree) {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let ctx = parse_context(&std::fs::read_to_string(path).unwrap(), name, Provenance::Local).unwrap();
    let tree = solve(&ctx, &ctx.goals[0].predicate, &SolveConfig::default());
    (ctx, tree)
}

fn short(ctx: &Context, tree: &ProofTree, id: NodeId) -> String {
    pretty_print(tree.predicate(id).unwrap(), PrintMode::Shortened, ctx)
}

#[test]
fn weight_table() {
    use Provenance::{External as E, Local as L};
    let rows = [
        (GoalKind::Trait { self_loc: L, trait_loc: L }, 0),
        (GoalKind::Trait { self_loc: L, trait_loc: E }, 1),
        (GoalKind::Trait { self_loc: E, trait_loc: L }, 1),
        (GoalKind::FnToTrait { trait_loc: L, arity: 3 }, 1),
        (GoalKind::Trait { self_loc: E, trait_loc: E }, 2),
        (GoalKind::TyChange, 4),
        (GoalKind::IncorrectParams { arity: 2 }, 10),
        (GoalKind::AddFnParams { delta: 1 }, 5),
        (GoalKind::DeleteFnParams { delta: 3 }, 15),
        (GoalKind::FnToTrait { trait_loc: E, arity: 1 }, 9),
        (GoalKind::TyAsCallable { arity: 2 }, 14),
        (GoalKind::Misc, 50),
    ];
    for (kind, w) in rows {
        assert_eq!(weight(kind), w, "{kind:?}");
    }
}

#[test]
fn simplification() {
    assert_eq!(Formula::and([Formula::True, v(1)]), v(1));
    assert_eq!(Formula::or([Formula::False, Formula::False]), Formula::False);
    assert_eq!(Formula::and([v(1), Formula::False]), Formula::False);
    assert_eq!(Formula::or([Formula::and([v(1), v(2)]), Formula::or([v(3)])]), Formula::Or(vec![Formula::And(vec![v(1), v(2)]), v(3)]));
}

#[test]
fn dnf_examples() {
    let f = Formula::and([Formula::or([v(1), v(2)]), v(3)]);
    assert_eq!(dnf_normalize(&f), vec![set(&[1, 3]), set(&[2, 3])]);
    assert_eq!(dnf_normalize(&v(7)), vec![set(&[7])]);
    assert_eq!(dnf_normalize(&Formula::True), vec![set(&[])]);
    assert_eq!(dnf_normalize(&Formula::False), Vec::<Conjunct>::new());
}

#[test]
fn mcs_examples() {
    let w = |_: NodeId| 1;
    let got = minimum_correction_sets(&[set(&[1]), set(&[1, 2])], &w);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].predicates, set(&[1]));
    let got = minimum_correction_sets(&[set(&[1, 2]), set(&[2, 3])], &w);
    assert_eq!(got.len(), 2);
    assert!(got.iter().all(|s| s.score == 2));
}

#[test]
fn bevy_pipeline() {
    let (ctx, tree) = fixture("bevy.tl");
    let formula = to_formula(&tree);
    let vars: Vec<String> = formula.vars().iter().map(|id| short(&ctx, &tree, *id)).collect();
    assert_eq!(vars, ["Timer: SystemParam", "{run_timer}: System"]);
    assert!(matches!(formula, Formula::Or(ref parts) if parts.len() == 2));

    let sets = minimum_correction_sets(&dnf_normalize(&formula), &|_| 1);
    let printed: Vec<Vec<String>> = sets
        .iter()
        .map(|s| s.predicates.iter().map(|id| short(&ctx, &tree, *id)).collect())
        .collect();
    assert_eq!(printed, [vec!["Timer: SystemParam"], vec!["{run_timer}: System"]]);

    let kinds: Vec<GoalKind> = formula
        .vars()
        .iter()
        .map(|id| classify_goal(tree.predicate(*id).unwrap(), &ctx))
        .collect();
    assert_eq!(
        kinds,
        [
            GoalKind::Trait {
                self_loc: Location::Local,
                trait_loc: Location::External
            },
            GoalKind::FnToTrait {
                trait_loc: Location::External,
                arity: 1
            }
        ]
    );

    let ranking = rank(&tree, &ctx, Heuristic::Inertia);
    let got: Vec<(String, usize)> = ranking.entries.iter().map(|e| (short(&ctx, &tree, e.node), e.key)).collect();
    assert_eq!(got, [("Timer: SystemParam".to_string(), 1), ("{run_timer}: System".to_string(), 9)]);
}

#[test]
fn diesel_mismatch_is_a_type_change() {
    let (ctx, tree) = fixture("diesel.tl");
    let leaves = crate::views::failed_leaves(&tree);
    assert_eq!(leaves.len(), 1);
    let leaf = *leaves.iter().next().unwrap();
    assert_eq!(classify_goal(tree.predicate(leaf).unwrap(), &ctx), GoalKind::TyChange);
}

#[test]
fn callable_classification() {
    let src = "#[callable(arity = 1)] extern trait Fn1<A>; extern trait Show; newtype Local = unit;\n\
               newtype f2 = fn(Local, Local) -> unit; newtype f0 = fn() -> unit; newtype f1 = fn(Local) -> unit;\n\
               goal a: f2: Fn1<Local>; goal b: f0: Fn1<Local>; goal c: f1: Fn1<unit>; goal d: Local: Fn1<Local>;\n\
               goal e: ?0: Show; goal f: Local: 'static; goal g: &'a Local: Show;";
    let ctx = parse_context(src, "t.tl", Provenance::Local).unwrap();
    let kind = |label: &str| classify_goal(&ctx.goal(label).unwrap().predicate, &ctx);
    assert_eq!(kind("a"), GoalKind::DeleteFnParams { delta: 1 });
    assert_eq!(kind("b"), GoalKind::AddFnParams { delta: 1 });
    assert_eq!(kind("c"), GoalKind::IncorrectParams { arity: 1 });
    assert_eq!(kind("d"), GoalKind::TyAsCallable { arity: 1 });
    assert_eq!(kind("e"), GoalKind::Misc);
    assert_eq!(kind("f"), GoalKind::Misc);
    assert_eq!(
        kind("g"),
        GoalKind::Trait {
            self_loc: Location::Local,
            trait_loc: Location::External
        }
    );
}

#[test]
fn baselines_and_single_leaf() {
    let (ctx, tree) = fixture("bevy.tl");
    let depth = rank(&tree, &ctx, Heuristic::Depth);
    let keys: Vec<usize> = depth.entries.iter().map(|e| e.key).collect();
    assert_eq!(keys, [2, 3]);
    assert_eq!(short(&ctx, &tree, depth.entries[0].node), "{run_timer}: System");

    let ctx = parse_context("trait Tr; newtype A = unit; goal g: A: Tr;", "t.tl", Provenance::Local).unwrap();
    let tree = solve(&ctx, &ctx.goals[0].predicate, &SolveConfig::default());
    let orders: BTreeSet<Vec<NodeId>> = Heuristic::ALL.iter().map(|h| rank(&tree, &ctx, *h).nodes()).collect();
    assert_eq!(orders.len(), 1);
    assert_eq!(orders.into_iter().next().unwrap(), vec![NodeId(0)]);
}

#[test]
fn successful_tree_is_true() {
    let (_, tree) = fixture("trivial.tl");
    assert_eq!(to_formula(&tree), Formula::True);
}
