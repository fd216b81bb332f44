//! Distance of each localization method from a known root cause.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::{NodeId, ProofTree, SolveConfig};
use crate::inertia::{dnf_normalize, to_formula, Heuristic};
use crate::lang::{pretty_print, Context, PrintMode};
use crate::views::failed_leaves;

use super::{analyze_goal, GoalAnalysis};

/// Mimics a compiler that follows a failure only while it is unambiguous:
/// from the root, descend into the single failing candidate and its first
/// failing subgoal, stopping at a goal with zero or several failing
/// candidates.
pub fn emulate_compiler_report(tree: &ProofTree) -> NodeId {
    let mut cur = tree.root();
    loop {
        let failing: Vec<NodeId> = tree.live_children(cur).filter(|c| !tree.node(*c).result.is_yes()).collect();
        let [cand] = failing.as_slice() else {
            return cur;
        };
        match tree.live_children(*cand).find(|g| !tree.node(*g).result.is_yes()) {
            Some(next) => cur = next,
            None => return cur,
        }
    }
}

/// Number of goals on the tree path from `from` to `to`, not counting
/// `from` itself; zero when they are the same node.
pub fn goal_distance(tree: &ProofTree, from: NodeId, to: NodeId) -> usize {
    let up = |id: NodeId| {
        let mut path = vec![id];
        path.extend(tree.ancestors(id));
        path
    };
    let (a, b) = (up(from), up(to));
    let lca = *a.iter().find(|n| b.contains(n)).expect("nodes share the root");
    let is_goal = |id: &&NodeId| tree.node(**id).is_goal();
    let rising = a.iter().take_while(|n| **n != lca).skip(1).filter(is_goal).count();
    let falling = b.iter().take_while(|n| **n != lca).filter(is_goal).count();
    let lca_counts = lca != from && tree.node(lca).is_goal();
    rising + falling + usize::from(lca_counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Inertia,
    Depth,
    InferVars,
    EmulatedCompiler,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Inertia, Method::Depth, Method::InferVars, Method::EmulatedCompiler];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Inertia => "inertia",
            Method::Depth => "depth",
            Method::InferVars => "infer_vars",
            Method::EmulatedCompiler => "emulated_compiler",
        }
    }

    fn heuristic(self) -> Option<Heuristic> {
        match self {
            Method::Inertia => Some(Heuristic::Inertia),
            Method::Depth => Some(Heuristic::Depth),
            Method::InferVars => Some(Heuristic::InferVarCount),
            Method::EmulatedCompiler => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramReport {
    pub program: String,
    pub goal: String,
    pub ground_truth: NodeId,
    pub distances: BTreeMap<Method, usize>,
    pub tree_size: usize,
    #[serde(with = "micros")]
    pub dnf_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub programs: Vec<ProgramReport>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CompareError {
    #[error("{program}: every goal holds, nothing to localize")]
    NoFailure { program: String },
    #[error("{program}: ground truth {wanted:?} matches no failed leaf; leaves are {leaves:?}")]
    Unmatched {
        program: String,
        wanted: String,
        leaves: Vec<String>,
    },
    #[error("{program}: ground truth {wanted:?} matches {count} failed leaves")]
    Ambiguous {
        program: String,
        wanted: String,
        count: usize,
    },
}

/// Compares every method on the first failing goal of `ctx`, whose root
/// cause is the failed leaf printing (shortened) as `ground_truth`.
pub fn compare_program(
    program: &str,
    ctx: &Context,
    ground_truth: &str,
    config: &SolveConfig,
) -> Result<ProgramReport, CompareError> {
    let analysis = ctx
        .goals
        .iter()
        .map(|g| analyze_goal(ctx, g, config))
        .find(|a| !a.tree.result().is_yes())
        .ok_or_else(|| CompareError::NoFailure {
            program: program.to_string(),
        })?;
    let truth = locate_ground_truth(program, ctx, &analysis, ground_truth)?;
    let tree = &analysis.tree;

    let mut distances = BTreeMap::new();
    for method in Method::ALL {
        let d = match method.heuristic() {
            Some(h) => analysis.ranking(h).position(truth).expect("rankings cover every failed leaf"),
            None => goal_distance(tree, emulate_compiler_report(tree), truth),
        };
        distances.insert(method, d);
    }
    let start = Instant::now();
    let conjuncts = dnf_normalize(&to_formula(tree));
    let dnf_time = start.elapsed();
    std::hint::black_box(conjuncts);

    Ok(ProgramReport {
        program: program.to_string(),
        goal: analysis.label.clone(),
        ground_truth: truth,
        distances,
        tree_size: tree.len(),
        dnf_time,
    })
}

fn locate_ground_truth(
    program: &str,
    ctx: &Context,
    analysis: &GoalAnalysis,
    wanted: &str,
) -> Result<NodeId, CompareError> {
    let tree = &analysis.tree;
    let leaves: Vec<(NodeId, String)> = failed_leaves(tree)
        .into_iter()
        .map(|id| (id, pretty_print(tree.predicate(id).expect("leaves are goals"), PrintMode::Shortened, ctx)))
        .collect();
    let hits: Vec<NodeId> = leaves.iter().filter(|(_, s)| s == wanted).map(|(id, _)| *id).collect();
    match hits.as_slice() {
        [one] => Ok(*one),
        [] => Err(CompareError::Unmatched {
            program: program.to_string(),
            wanted: wanted.to_string(),
            leaves: leaves.into_iter().map(|(_, s)| s).collect(),
        }),
        many => Err(CompareError::Ambiguous {
            program: program.to_string(),
            wanted: wanted.to_string(),
            count: many.len(),
        }),
    }
}

impl ComparisonReport {
    pub fn distances(&self, method: Method) -> Vec<usize> {
        self.programs.iter().map(|p| p.distances[&method]).collect()
    }

    /// Median distance; the mean of the two middle values for even counts.
    pub fn median(&self, method: Method) -> f64 {
        median(&self.distances(method))
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<16}", "program");
        for m in Method::ALL {
            out.push_str(&format!("{:>19}", m.as_str()));
        }
        out.push_str(&format!("{:>8}{:>12}\n", "nodes", "dnf_us"));
        for p in &self.programs {
            out.push_str(&format!("{:<16}", p.program));
            for m in Method::ALL {
                out.push_str(&format!("{:>19}", p.distances[&m]));
            }
            out.push_str(&format!("{:>8}{:>12}\n", p.tree_size, p.dnf_time.as_micros()));
        }
        out.push_str(&format!("{:<16}", "median"));
        for m in Method::ALL {
            out.push_str(&format!("{:>19}", self.median(m)));
        }
        out.push('\n');
        out
    }
}

pub fn median(values: &[usize]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] + v[mid]) as f64 / 2.0
    }
}

/// Ground-truth sidecar file: program file name → shortened predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthMap {
    pub programs: BTreeMap<String, String>,
}

impl GroundTruthMap {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Looks `program` up by its exact path, then by file name.
    pub fn get(&self, program: &str) -> Option<&str> {
        self.programs
            .get(program)
            .or_else(|| {
                let name = std::path::Path::new(program).file_name()?.to_str()?;
                self.programs.get(name)
            })
            .map(String::as_str)
    }
}

mod micros {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_micros)
    }
}
