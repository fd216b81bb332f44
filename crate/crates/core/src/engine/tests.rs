use crate::lang::*;

use super::*;

fn ctx(src: &str) -> Context {
    let ctx = parse_context(src, "t.tl", Provenance::Local).unwrap();
    assert_eq!(check_well_formed(&ctx), vec![]);
    ctx
}

fn fixture(name: &str) -> Context {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let src = std::fs::read_to_string(&path).unwrap();
    ctx(&src)
}

fn run(ctx: &Context, label: &str) -> ProofTree {
    let tree = solve(ctx, &ctx.goal(label).unwrap().predicate, &SolveConfig::default());
    validate(&tree).unwrap_or_else(|e| panic!("{e:#?}"));
    tree
}

fn short(ctx: &Context, tree: &ProofTree, id: NodeId) -> String {
    pretty_print(tree.predicate(id).unwrap(), PrintMode::Shortened, ctx)
}

fn goals_printed(ctx: &Context, tree: &ProofTree) -> Vec<String> {
    tree.nodes
        .iter()
        .filter(|n| n.is_goal())
        .map(|n| format!("{} {}", short(ctx, tree, n.id), n.result.value.as_str()))
        .collect()
}

#[test]
fn direct_impl_hit() {
    let c = ctx("trait SystemParam; newtype Timer = unit; impl SystemParam for Timer; goal g: Timer: SystemParam;");
    let tree = run(&c, "g");
    assert_eq!(tree.result(), &EvalResult::yes());
    assert_eq!(tree.len(), 2);
    assert_eq!(tree.node(NodeId(1)).impl_ref(), Some(ImplRef::Impl(ImplId(0))));
    assert!(tree.node(NodeId(1)).children.is_empty());
}

#[test]
fn outlives_is_assumed() {
    let c = ctx("newtype Timer = unit; goal g: Timer: 'static;");
    let tree = run(&c, "g");
    assert_eq!(tree.result(), &EvalResult::yes());
    assert_eq!(tree.node(NodeId(1)).impl_ref(), Some(ImplRef::BuiltIn(BuiltIn::OutlivesAssumed)));
}

#[test]
fn no_candidates() {
    let c = ctx("trait SystemParam; newtype Timer = unit; goal g: Timer: SystemParam;");
    assert_eq!(run(&c, "g").result(), &EvalResult::no(Reason::NoCandidates));
}

const RESMUT: &str = "trait Resource; trait SystemParam; newtype ResMut<T> = unit; newtype Timer = unit;\n\
                      impl<T> SystemParam for ResMut<T> where T: Resource;\n\
                      goal a: ResMut<Timer>: SystemParam; goal b: Timer: SystemParam; goal c: ?0: SystemParam;";

#[test]
fn assemble_candidates_by_head() {
    let c = ctx(RESMUT);
    let timer = Type::ctor(c.symbol_by_path("Timer").unwrap(), vec![]);
    let got = assemble_candidates(&c, &c.goal("a").unwrap().predicate);
    assert_eq!(got, vec![(ImplId(0), Substitution::from_pairs([(InferVar(0), timer)]))]);
    assert!(assemble_candidates(&c, &c.goal("b").unwrap().predicate).is_empty());
    let got = assemble_candidates(&c, &c.goal("c").unwrap().predicate);
    assert_eq!(got.len(), 1);
    let resmut = c.symbol_by_path("ResMut").unwrap();
    assert_eq!(
        apply_subst(&Type::infer(0), &got[0].1),
        Type::ctor(resmut, vec![Type::infer(1)])
    );
}

#[test]
fn unresolved_variables_make_maybe() {
    let c = ctx("trait Tr; newtype A = unit; newtype B = unit; impl Tr for A; impl Tr for B; goal g: ?0: Tr;");
    let tree = run(&c, "g");
    assert_eq!(
        tree.result(),
        &EvalResult::maybe(Reason::Ambiguous {
            vars: vec![InferVar(0)]
        })
    );
}

#[test]
fn unique_candidate_instantiates_goal() {
    let c = ctx("trait Tr; newtype A = unit; impl Tr for A; goal g: ?0: Tr;");
    let tree = run(&c, "g");
    assert!(tree.result().is_yes());
    assert_eq!(short(&c, &tree, tree.root()), "A: Tr");
}

#[test]
fn bevy_branch_point() {
    let c = fixture("bevy.tl");
    let tree = run(&c, "add_systems");
    assert_eq!(tree.result().value, ResultValue::No);
    let goals = goals_printed(&c, &tree);
    assert_eq!(
        goals,
        vec![
            "{run_timer}: IntoSystemConfigs<..> no",
            "{run_timer}: IntoSystem<..> no",
            "{run_timer}: SystemParamFunction<..> no",
            "{run_timer}: FnMut<..> yes",
            "Timer: SystemParam no",
            "{run_timer}: System no",
        ]
    );
    let branch = tree.nodes.iter().find(|n| n.is_goal() && short(&c, &tree, n.id).contains("IntoSystem<")).unwrap();
    assert_eq!(branch.children.len(), 2);
    let bevy_into = c.symbol_by_path("bevy::IntoSystem").unwrap();
    let run_timer = Type::ctor(c.symbol_by_path("app::run_timer").unwrap(), vec![]);
    assert_eq!(
        branch.predicate().unwrap(),
        &Predicate::trait_bound(run_timer, bevy_into, vec![Type::Unit, Type::Unit, Type::infer(1)])
    );
}

#[test]
fn ast_overflow_cycle() {
    let c = fixture("ast.tl");
    let tree = run(&c, "statement");
    let Reason::Overflow { cycle_path } = &tree.result().reason else {
        panic!("{:?}", tree.result());
    };
    assert_eq!(tree.result().value, ResultValue::Maybe);
    let chain: Vec<String> = cycle_path.iter().map(|id| short(&c, &tree, *id)).collect();
    assert_eq!(chain, ["EmptyNode: AstAssocs", "EmptyNode: AssocData<..>", "EmptyNode: AstAssocs"]);
    let first = tree.predicate(cycle_path[0]).unwrap();
    let last = tree.predicate(*cycle_path.last().unwrap()).unwrap();
    assert!(alpha_equivalent(first, last));
}

#[test]
fn ast_projection_is_unresolved() {
    let c = fixture("ast.tl");
    let Predicate::TraitBound { self_ty, instance } = &c.goal("statement").unwrap().predicate else {
        unreachable!()
    };
    let proj = Projection {
        self_ty: self_ty.clone(),
        assoc: c.symbol_by_path("AstAssocs::Data").unwrap(),
        instance: instance.clone(),
        type_args: vec![],
        region_args: vec![],
    };
    let (ty, evidence) = normalize_projection(&c, &proj, &SolveConfig::default());
    assert_eq!(ty, None);
    assert!(matches!(evidence.result().reason, Reason::Overflow { .. }));
}

#[test]
fn single_impl_projection_resolves() {
    let src = "trait SystemParam { type Item; } newtype ResMut<T> = unit; newtype Timer = unit;\n\
               impl<T> SystemParam for ResMut<T> { type Item = ResMut<T>; }\n\
               trait Empty { type Out; }\n\
               goal g: <ResMut<Timer> as SystemParam>::Item == ResMut<Timer>;";
    let c = ctx(src);
    let Predicate::ProjectionEq { projection, rhs } = &c.goal("g").unwrap().predicate else {
        unreachable!()
    };
    let (ty, evidence) = normalize_projection(&c, projection, &SolveConfig::default());
    assert_eq!(ty.as_ref(), Some(rhs));
    assert!(evidence.result().is_yes());
    assert!(run(&c, "g").result().is_yes());

    let empty = c.symbol_by_path("Empty").unwrap();
    let proj = Projection {
        self_ty: rhs.clone(),
        assoc: c.symbol_by_path("Empty::Out").unwrap(),
        instance: TraitInstance::new(empty, vec![]),
        type_args: vec![],
        region_args: vec![],
    };
    let (ty, evidence) = normalize_projection(&c, &proj, &SolveConfig::default());
    assert_eq!(ty, None);
    assert_eq!(evidence.result(), &EvalResult::no(Reason::NoCandidates));
}

#[test]
fn projection_mismatch_and_reflexivity() {
    let src = "trait AppearsInFromClause<T> { type Count; } newtype Once = unit; newtype Never = unit;\n\
               newtype table = unit; newtype other = unit;\n\
               impl AppearsInFromClause<other> for table { type Count = Never; }\n\
               goal bad: <table as AppearsInFromClause<other>>::Count == Once;\n\
               goal refl: <table as AppearsInFromClause<table>>::Count == <table as AppearsInFromClause<table>>::Count;";
    let c = ctx(src);
    let tree = run(&c, "bad");
    assert_eq!(tree.result().value, ResultValue::No);
    assert!(matches!(tree.result().reason, Reason::TypeMismatch { .. }));
    assert!(run(&c, "refl").result().is_yes());
}

#[test]
fn diesel_mismatch_leaf() {
    let c = fixture("diesel.tl");
    let tree = run(&c, "load");
    assert_eq!(tree.result().value, ResultValue::No);
    let goals = goals_printed(&c, &tree);
    assert!(goals.contains(&"<table as AppearsInFromClause<..>>::Count == Once no".to_string()), "{goals:#?}");
    assert!(goals.contains(&"Eq<..>: AppearsOnTable<..> no".to_string()), "{goals:#?}");
}

#[test]
fn normalization_in_trait_bounds() {
    let src = "trait Iter { type Item; } trait Show; newtype Vec<T> = unit; newtype Num = unit;\n\
               impl<T> Iter for Vec<T> { type Item = T; } impl Show for Num;\n\
               goal g: <Vec<Num> as Iter>::Item: Show; goal h: <Vec<Vec<Num>> as Iter>::Item: Show;";
    let c = ctx(src);
    let tree = run(&c, "g");
    assert!(tree.result().is_yes());
    assert_eq!(tree.node(NodeId(1)).impl_ref(), Some(ImplRef::BuiltIn(BuiltIn::Normalize)));
    let tree = run(&c, "h");
    assert_eq!(tree.result().value, ResultValue::No);
}

#[test]
fn existential_bounds() {
    let src = "trait Show; trait Debug; newtype Box<T> = unit; impl<T> Show for Box<T> where T: Show;\n\
               goal g: Box<dyn Show>: Show; goal h: Box<dyn Debug>: Show;";
    let c = ctx(src);
    assert!(run(&c, "g").result().is_yes());
    assert_eq!(run(&c, "h").result().value, ResultValue::No);
}

#[test]
fn where_clause_fixpoint_reevaluates() {
    // `?0: Pick` is ambiguous until `Wrap<?0>: Fixed` pins it down.
    let src = "trait Pick; trait Fixed; trait Goal; newtype A = unit; newtype B = unit; newtype Wrap<T> = unit;\n\
               impl Pick for A; impl Pick for B; impl Fixed for Wrap<A>;\n\
               newtype S<T> = unit; impl<T> Goal for S<T> where T: Pick, Wrap<T>: Fixed;\n\
               goal g: S<?0>: Goal;";
    let c = ctx(src);
    let tree = run(&c, "g");
    assert!(tree.result().is_yes(), "{:?}", tree.result());
    assert_eq!(short(&c, &tree, tree.root()), "S<..>: Goal");
    let cand = tree.node(NodeId(1));
    assert_eq!(cand.children.len(), 2);

    let kept = solve(
        &c,
        &c.goal("g").unwrap().predicate,
        &SolveConfig {
            dedup_snapshots: false,
            ..SolveConfig::default()
        },
    );
    validate(&kept).unwrap();
    assert_eq!(kept.node(NodeId(1)).children.len(), 3);
    assert!(kept.nodes.iter().filter(|n| n.is_stale()).count() == 1);
    assert_eq!(kept.result(), tree.result());
}

#[test]
fn depth_bound_cuts_growing_goals() {
    let src = "trait Deep; newtype W<T> = unit; newtype A = unit; impl<T> Deep for T where W<T>: Deep; goal g: A: Deep;";
    let c = ctx(src);
    let config = SolveConfig {
        max_depth: 5,
        ..SolveConfig::default()
    };
    let tree = solve(&c, &c.goal("g").unwrap().predicate, &config);
    validate(&tree).unwrap();
    assert_eq!(tree.result().value, ResultValue::Maybe);
    let cut = tree.nodes.iter().find(|n| n.is_goal() && n.children.is_empty()).unwrap();
    assert_eq!(cut.depth, 6);
    assert_eq!(cut.result.reason, Reason::Overflow { cycle_path: vec![cut.id] });
}

#[test]
fn deterministic() {
    let c = fixture("diesel.tl");
    assert_eq!(run(&c, "load"), run(&c, "load"));
}

#[test]
fn callable_arity_must_match() {
    let c = fixture("axum.tl");
    let tree = run(&c, "route");
    assert_eq!(tree.result().value, ResultValue::No);
    let goals = goals_printed(&c, &tree);
    assert!(goals.contains(&"{create_user}: FnOnce1<..> no".to_string()), "{goals:#?}");
    assert!(goals.contains(&"{create_user}: FnOnce2<..> yes".to_string()), "{goals:#?}");
    assert!(goals.contains(&"Json<..>: FromRequestParts<..> no".to_string()), "{goals:#?}");
}
