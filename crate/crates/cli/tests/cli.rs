use std::path::PathBuf;
use std::process::Command;

use traitscope::report::read_document;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_traitscope"))
        .args(args)
        .env_remove("TRAITSCOPE_MAX_DEPTH")
        .envs(env.iter().copied())
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn check_bevy_reports_the_system_param_first() {
    let r = run(&["check", &path("bevy.tl")], &[]);
    assert_eq!(r.code, 1);
    let first = r.stdout.lines().find(|l| l.trim_start().starts_with("1. ")).unwrap();
    assert_eq!(first.trim(), "1. Timer: SystemParam");
}

#[test]
fn check_trivial_holds() {
    let r = run(&["check", &path("trivial.tl")], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.ends_with("all goals hold\n"));
}

#[test]
fn syntax_error_is_one_line_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.tl");
    std::fs::write(&file, "trait Tr;\nimpl Tr for ;\n").unwrap();
    let r = run(&["check", file.to_str().unwrap()], &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.stderr.lines().count(), 1, "{}", r.stderr);
    assert!(r.stderr.contains(":2:"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn ill_formed_program_lists_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("wf.tl");
    std::fs::write(&file, "trait Tr<A>; newtype X = unit; goal g: X: Tr<X, X>;\n").unwrap();
    let r = run(&["check", file.to_str().unwrap()], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("[arity]"), "{}", r.stderr);
}

#[test]
fn text_tree_shows_the_cycle_in_order() {
    let r = run(&["tree", &path("ast.tl"), "--goal", "statement"], &[]);
    assert_eq!(r.code, 0);
    let goals: Vec<&str> = r
        .stdout
        .lines()
        .filter(|l| l.contains("EmptyNode:"))
        // "<glyph> <id> <predicate>  [reason]"
        .map(|l| l.trim_start().splitn(3, ' ').nth(2).unwrap())
        .map(|l| l.split("  [").next().unwrap())
        .collect();
    assert_eq!(goals, ["EmptyNode: AstAssocs", "EmptyNode: AssocData<..>", "EmptyNode: AstAssocs"]);
    assert!(r.stdout.contains("[overflow: #0 -> #2 -> #4]"));
}

#[test]
fn json_tree_round_trips_and_ranks_system_param_first() {
    for name in ["bevy.tl", "diesel.tl", "ast.tl", "axum.tl", "brew.tl", "space.tl", "trivial.tl"] {
        let file = path(name);
        let label = traitscope::lang::parse_context(
            &std::fs::read_to_string(&file).unwrap(),
            name,
            traitscope::lang::Provenance::Local,
        )
        .unwrap()
        .goals[0]
            .label
            .clone();
        let r = run(&["tree", &file, "--goal", &label, "--format", "json"], &[]);
        assert_eq!(r.code, 0, "{name}: {}", r.stderr);
        let doc = read_document(&r.stdout).unwrap();
        assert_eq!(traitscope::report::write_document(&doc), r.stdout, "{name}");
        assert!(doc.dangling_references().is_empty());
    }
    let r = run(&["tree", &path("bevy.tl"), "--goal", "add_systems", "--format", "json"], &[]);
    let doc = read_document(&r.stdout).unwrap();
    let first = doc.rankings["add_systems"]["inertia"][0];
    let node = &doc.goals[0].nodes[&first];
    assert_eq!(node.predicate.as_ref().unwrap().short, "Timer: SystemParam");
}

#[test]
fn unknown_goal_exits_two() {
    let r = run(&["tree", &path("bevy.tl"), "--goal", "missing"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("add_systems"));
    let r = run(&["rank", &path("bevy.tl"), "--goal", "missing"], &[]);
    assert_eq!(r.code, 2);
}

#[test]
fn rank_orders_by_heuristic() {
    let first = |h: &str| {
        let r = run(&["rank", &path("bevy.tl"), "--goal", "add_systems", "--heuristic", h], &[]);
        assert_eq!(r.code, 0);
        r.stdout.lines().next().unwrap().to_string()
    };
    assert!(first("inertia").contains("Timer: SystemParam  (key 1)"));
    assert!(first("depth").contains("{run_timer}: System  (key 2)"));
    assert!(first("vars").contains("(key 0)"));
}

#[test]
fn compare_suite_table_and_json() {
    let files: Vec<String> = ["bevy.tl", "diesel.tl", "ast.tl", "axum.tl", "brew.tl", "space.tl"]
        .iter()
        .map(|n| path(n))
        .collect();
    let map = path("ground_truth.toml");
    let mut args = vec!["compare"];
    args.extend(files.iter().map(String::as_str));
    args.extend(["--ground-truth-map", &map]);
    let r = run(&args, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("program"));
    assert!(r.stdout.lines().last().unwrap().starts_with("median"));

    args.push("--json");
    let r = run(&args, &[]);
    let report: traitscope::report::ComparisonReport = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report.programs.len(), 6);
    for p in &report.programs {
        let inertia = p.distances[&traitscope::report::Method::Inertia];
        assert_eq!(inertia, 0, "{}", p.program);
        assert!(p.distances.values().all(|d| *d >= inertia));
    }
}

#[test]
fn compare_rejects_unmatched_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("truth.toml");
    std::fs::write(&map, "[programs]\n\"bevy.tl\" = \"Timer: Resource\"\n").unwrap();
    let r = run(&["compare", &path("bevy.tl"), "--ground-truth-map", map.to_str().unwrap()], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("Timer: SystemParam"), "{}", r.stderr);
}

#[test]
fn max_depth_comes_from_the_environment() {
    let r = run(&["check", &path("diesel.tl")], &[("TRAITSCOPE_MAX_DEPTH", "1")]);
    assert!(r.stdout.starts_with("load: maybe"), "{}", r.stdout);
    let r = run(&["check", &path("diesel.tl")], &[]);
    assert!(r.stdout.starts_with("load: no"), "{}", r.stdout);
    let r = run(&["check", &path("diesel.tl")], &[("TRAITSCOPE_MAX_DEPTH", "deep")]);
    assert_eq!(r.code, 2);
}

#[test]
fn busy_port_exits_two() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let r = run(&["serve", &path("bevy.tl"), "--port", &port], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("cannot listen"), "{}", r.stderr);
}
