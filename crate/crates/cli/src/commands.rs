use std::fmt::Write as _;
use std::path::Path;

use traitscope::engine::{ResultValue, SolveConfig};
use traitscope::inertia::Heuristic;
use traitscope::lang::{check_well_formed, parse_context, pretty_print, Context, PrintMode, Provenance};
use traitscope::report::{
    analyze, analyze_goal, build_document, compare_program, to_canonical_json, write_document, ComparisonReport,
    GroundTruthMap,
};
use traitscope::views::bottom_up;

use crate::render::render_tree;

pub const MAX_DEPTH_VAR: &str = "TRAITSCOPE_MAX_DEPTH";

/// What a command printed and the status it exits with: 0 success, 1 a
/// goal failed, 2 bad input.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Output {
        Output {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(stderr: impl Into<String>) -> Output {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Output {
            code: 2,
            stdout: String::new(),
            stderr,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Heuristic names as spelled on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RankHeuristic {
    Inertia,
    Depth,
    Vars,
}

impl From<RankHeuristic> for Heuristic {
    fn from(h: RankHeuristic) -> Heuristic {
        match h {
            RankHeuristic::Inertia => Heuristic::Inertia,
            RankHeuristic::Depth => Heuristic::Depth,
            RankHeuristic::Vars => Heuristic::InferVarCount,
        }
    }
}

/// Solver settings, with `max_depth` taken from `TRAITSCOPE_MAX_DEPTH`
/// when that is set.
pub fn solve_config(max_depth: Option<&str>) -> Result<SolveConfig, Output> {
    let mut config = SolveConfig::default();
    if let Some(raw) = max_depth {
        config.max_depth = raw
            .trim()
            .parse()
            .map_err(|_| Output::usage(format!("{MAX_DEPTH_VAR} must be a non-negative integer, got {raw:?}")))?;
    }
    Ok(config)
}

/// Reads, parses and checks a program. Any problem becomes an exit-2
/// output with one line per diagnostic.
pub fn load(path: &Path) -> Result<Context, Output> {
    let name = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| Output::usage(format!("{name}: {e}")))?;
    let ctx = parse_context(&src, &name, Provenance::Local).map_err(|e| Output::usage(format!("{name}:{e}")))?;
    let diagnostics = check_well_formed(&ctx);
    if !diagnostics.is_empty() {
        let lines: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(Output::usage(lines.join("\n")));
    }
    Ok(ctx)
}

fn short<T: traitscope::lang::PrettyPrint + ?Sized>(item: &T, ctx: &Context) -> String {
    pretty_print(item, PrintMode::Shortened, ctx)
}

pub fn check(path: &Path, config: &SolveConfig) -> Output {
    let ctx = match load(path) {
        Ok(ctx) => ctx,
        Err(out) => return out,
    };
    let mut out = String::new();
    let mut failed = 0;
    for a in analyze(&ctx, config) {
        let result = a.tree.result().value;
        let root = a.tree.predicate(a.tree.root()).expect("root is a goal");
        let _ = writeln!(out, "{}: {}  ({})", a.label, result.as_str(), short(root, &ctx));
        if result == ResultValue::Yes {
            continue;
        }
        failed += 1;
        let view = bottom_up(&a.tree, a.ranking(Heuristic::Inertia));
        for (i, entry) in view.entries.iter().take(3).enumerate() {
            let leaf = a.tree.predicate(entry.leaf).expect("leaves are goals");
            let _ = writeln!(out, "  {}. {}", i + 1, short(leaf, &ctx));
            for id in &entry.ancestors {
                if let Some(p) = a.tree.predicate(*id) {
                    let _ = writeln!(out, "       required by {}", short(p, &ctx));
                }
            }
        }
        if view.entries.len() > 3 {
            let _ = writeln!(out, "  ({} more)", view.entries.len() - 3);
        }
    }
    if failed == 0 {
        out.push_str("all goals hold\n");
    }
    Output {
        code: i32::from(failed > 0),
        stdout: out,
        stderr: String::new(),
    }
}

fn unknown_goal(ctx: &Context, label: &str) -> Output {
    let known: Vec<&str> = ctx.goals.iter().map(|g| g.label.as_str()).collect();
    Output::usage(format!("no goal labelled `{label}`; goals are: {}", known.join(", ")))
}

pub fn tree(path: &Path, label: &str, format: Format, config: &SolveConfig) -> Output {
    let ctx = match load(path) {
        Ok(ctx) => ctx,
        Err(out) => return out,
    };
    let Some(goal) = ctx.goal(label) else {
        return unknown_goal(&ctx, label);
    };
    let analysis = analyze_goal(&ctx, goal, config);
    match format {
        Format::Json => Output::ok(write_document(&build_document(&ctx, std::slice::from_ref(&analysis)))),
        Format::Text => Output::ok(render_tree(&analysis.tree, &ctx)),
    }
}

pub fn rank(path: &Path, label: &str, heuristic: RankHeuristic, config: &SolveConfig) -> Output {
    let ctx = match load(path) {
        Ok(ctx) => ctx,
        Err(out) => return out,
    };
    let Some(goal) = ctx.goal(label) else {
        return unknown_goal(&ctx, label);
    };
    let analysis = analyze_goal(&ctx, goal, config);
    let ranking = analysis.ranking(heuristic.into());
    let mut out = String::new();
    for (i, e) in ranking.entries.iter().enumerate() {
        let p = analysis.tree.predicate(e.node).expect("ranked nodes are goals");
        let _ = writeln!(out, "{:>3}. {:<6} {}  (key {})", i + 1, e.node.to_string(), short(p, &ctx), e.key);
    }
    if ranking.entries.is_empty() {
        out.push_str("no failed predicates\n");
    }
    Output::ok(out)
}

pub fn compare(paths: &[impl AsRef<Path>], ground_truth: &Path, json: bool, config: &SolveConfig) -> Output {
    let text = match std::fs::read_to_string(ground_truth) {
        Ok(t) => t,
        Err(e) => return Output::usage(format!("{}: {e}", ground_truth.display())),
    };
    let map = match GroundTruthMap::parse(&text) {
        Ok(m) => m,
        Err(e) => return Output::usage(format!("{}: {e}", ground_truth.display())),
    };
    let mut programs = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let name = path.display().to_string();
        let ctx = match load(path) {
            Ok(ctx) => ctx,
            Err(out) => return out,
        };
        let Some(wanted) = map.get(&name) else {
            return Output::usage(format!("{name}: no entry in {}", ground_truth.display()));
        };
        let label = path.file_name().map_or(name.clone(), |n| n.to_string_lossy().into_owned());
        match compare_program(&label, &ctx, wanted, config) {
            Ok(report) => programs.push(report),
            Err(e) => return Output::usage(e.to_string()),
        }
    }
    let report = ComparisonReport { programs };
    Output::ok(if json { to_canonical_json(&report) } else { report.to_table() })
}
