//! Read-only HTTP API over a solved program, re-solved when the file
//! changes on disk.
//!
//! Every request reads one [`Snapshot`], so a response never mixes two
//! generations of the document.

use std::convert::Infallible;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use futures::Stream;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use traitscope::engine::{NodeId, SolveConfig};
use traitscope::lang::{pretty_print, Context, PrintMode, SymbolKind};
use traitscope::report::{analyze, build_document, impl_head, to_canonical_json, DocGoal, DocNode, TreeDocument};

use crate::commands::{load, Output};

pub const GENERATION_HEADER: &str = "x-traitscope-generation";

/// One solved version of the served file.
#[derive(Debug)]
pub struct Snapshot {
    pub generation: u64,
    pub source: String,
    pub ctx: Context,
    pub doc: TreeDocument,
}

#[derive(Debug)]
pub struct AppState {
    path: PathBuf,
    config: SolveConfig,
    current: RwLock<Arc<Snapshot>>,
    events: broadcast::Sender<u64>,
}

fn solve_file(path: &Path, config: &SolveConfig, generation: u64) -> Result<Snapshot, Output> {
    let source = std::fs::read_to_string(path).map_err(|e| Output {
        code: 2,
        stderr: format!("{}: {e}\n", path.display()),
        ..Output::default()
    })?;
    let ctx = load(path)?;
    let doc = build_document(&ctx, &analyze(&ctx, config));
    Ok(Snapshot {
        generation,
        source,
        ctx,
        doc,
    })
}

impl AppState {
    pub fn load(path: impl Into<PathBuf>, config: SolveConfig) -> Result<Arc<AppState>, Output> {
        let path = path.into();
        let first = solve_file(&path, &config, 0)?;
        let (events, _) = broadcast::channel(16);
        Ok(Arc::new(AppState {
            path,
            config,
            current: RwLock::new(Arc::new(first)),
            events,
        }))
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<u64> {
        self.events.subscribe()
    }

    /// Re-solves when the file's text changed. Returns the new generation,
    /// or `None` when nothing changed. A file that no longer parses keeps
    /// the previous document.
    pub fn reload(&self) -> Result<Option<u64>, Output> {
        let old = self.snapshot();
        match std::fs::read_to_string(&self.path) {
            Ok(text) if text == old.source => return Ok(None),
            _ => {}
        }
        let next = solve_file(&self.path, &self.config, old.generation + 1)?;
        let generation = next.generation;
        *self.current.write().expect("snapshot lock") = Arc::new(next);
        // Nobody listening is fine.
        let _ = self.events.send(generation);
        Ok(Some(generation))
    }
}

/// Polls the file and re-solves on change, forever.
pub async fn watch(state: Arc<AppState>, every: Duration) {
    let mut tick = tokio::time::interval(every);
    loop {
        tick.tick().await;
        if let Err(out) = state.reload() {
            eprint!("{}", out.stderr);
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/goals", get(goals))
        .route("/api/tree", get(tree))
        .route("/api/node/:id", get(node))
        .route("/api/impls", get(impls))
        .route("/api/rankings", get(rankings))
        .route("/api/source", get(source))
        .route("/api/events", get(events))
        .with_state(state)
}

/// Binds on loopback, then serves until the process is stopped.
pub async fn serve(path: &Path, port: u16, config: SolveConfig) -> Output {
    let state = match AppState::load(path, config) {
        Ok(s) => s,
        Err(out) => return out,
    };
    let listener = match tokio::net::TcpListener::bind(("127.0.0.1", port)).await {
        Ok(l) => l,
        Err(e) => {
            return Output {
                code: 2,
                stderr: format!("cannot listen on 127.0.0.1:{port}: {e}\n"),
                ..Output::default()
            }
        }
    };
    let addr = listener.local_addr().map(|a| a.to_string()).unwrap_or_default();
    println!("serving {} on http://{addr}", path.display());
    tokio::spawn(watch(state.clone(), Duration::from_millis(500)));
    match axum::serve(listener, router(state)).await {
        Ok(()) => Output::default(),
        Err(e) => Output {
            code: 1,
            stderr: format!("server stopped: {e}\n"),
            ..Output::default()
        },
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = to_canonical_json(&serde_json::json!({ "error": self.1 }));
        (self.0, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn json<T: Serialize>(snap: &Snapshot, value: &T) -> ApiResult {
    let mut resp = (
        [(header::CONTENT_TYPE, "application/json")],
        to_canonical_json(value),
    )
        .into_response();
    resp.headers_mut()
        .insert(GENERATION_HEADER, HeaderValue::from(snap.generation));
    Ok(resp)
}

fn not_found(what: String) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, what)
}

fn bad_request(what: String) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, what)
}

/// The named goal, or the only one when no name is given.
fn pick_goal<'s>(snap: &'s Snapshot, label: Option<&str>) -> Result<&'s DocGoal, ApiError> {
    match label {
        Some(l) => snap
            .doc
            .goals
            .iter()
            .find(|g| g.label == l)
            .ok_or_else(|| not_found(format!("no goal labelled `{l}`"))),
        None => match snap.doc.goals.as_slice() {
            [only] => Ok(only),
            _ => Err(bad_request("several goals; pass ?goal=<label>".into())),
        },
    }
}

async fn index() -> Html<&'static str> {
    Html(concat!(
        "<!doctype html><meta charset=utf-8><title>traitscope</title>",
        "<p>traitscope debugger API: <a href=/api/goals>/api/goals</a>, ",
        "<a href=/api/tree>/api/tree</a>, /api/node/{id}, /api/impls?trait=, ",
        "/api/rankings?goal=, /api/source?file=&amp;line=, /api/events</p>\n"
    ))
}

#[derive(Serialize)]
struct GoalSummary<'a> {
    label: &'a str,
    result: traitscope::engine::ResultValue,
    root: NodeId,
    predicate: Option<&'a str>,
}

async fn goals(State(state): State<Arc<AppState>>) -> ApiResult {
    let snap = state.snapshot();
    let list: Vec<GoalSummary> = snap
        .doc
        .goals
        .iter()
        .map(|g| GoalSummary {
            label: &g.label,
            result: g.result,
            root: g.root,
            predicate: g.nodes.get(&g.root).and_then(|n| n.predicate.as_ref()).map(|p| p.short.as_str()),
        })
        .collect();
    json(&snap, &list)
}

#[derive(Deserialize)]
struct GoalQuery {
    goal: Option<String>,
}

/// The whole document, or a document holding just one goal.
async fn tree(State(state): State<Arc<AppState>>, Query(q): Query<GoalQuery>) -> ApiResult {
    let snap = state.snapshot();
    let Some(label) = q.goal.as_deref() else {
        return json(&snap, &snap.doc);
    };
    let goal = pick_goal(&snap, Some(label))?;
    let doc = &snap.doc;
    let fragment = TreeDocument {
        schema_version: doc.schema_version.clone(),
        symbols: doc.symbols.clone(),
        goals: vec![goal.clone()],
        rankings: doc.rankings.iter().filter(|(k, _)| *k == label).map(|(k, v)| (k.clone(), v.clone())).collect(),
        views: doc.views.iter().filter(|(k, _)| *k == label).map(|(k, v)| (k.clone(), v.clone())).collect(),
    };
    json(&snap, &fragment)
}

#[derive(Serialize)]
struct NodeReply<'a> {
    goal: &'a str,
    id: NodeId,
    node: &'a DocNode,
}

async fn node(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<u32>,
    Query(q): Query<GoalQuery>,
) -> ApiResult {
    let snap = state.snapshot();
    let goal = pick_goal(&snap, q.goal.as_deref())?;
    let id = NodeId(id);
    let node = goal
        .nodes
        .get(&id)
        .ok_or_else(|| not_found(format!("goal `{}` has no node {id}", goal.label)))?;
    json(
        &snap,
        &NodeReply {
            goal: &goal.label,
            id,
            node,
        },
    )
}

#[derive(Deserialize)]
struct TraitQuery {
    #[serde(rename = "trait")]
    name: String,
}

#[derive(Serialize)]
struct ImplEntry {
    id: traitscope::lang::ImplId,
    head_short: String,
    head_qualified: String,
    where_clauses: Vec<String>,
    span: traitscope::lang::Span,
}

async fn impls(State(state): State<Arc<AppState>>, Query(q): Query<TraitQuery>) -> ApiResult {
    let snap = state.snapshot();
    let ctx = &snap.ctx;
    let id = ctx
        .symbol_by_name(&q.name)
        .filter(|id| ctx.symbol(*id).is_some_and(|s| s.kind == SymbolKind::Trait))
        .ok_or_else(|| not_found(format!("no unique trait named `{}`", q.name)))?;
    let entries: Vec<ImplEntry> = ctx
        .impls_of(id)
        .map(|(imp, decl)| ImplEntry {
            id: imp.id,
            head_short: impl_head(ctx, imp, PrintMode::Shortened),
            head_qualified: impl_head(ctx, imp, PrintMode::FullyQualified),
            where_clauses: imp
                .params
                .where_clauses
                .iter()
                .map(|p| pretty_print(p, PrintMode::Shortened, ctx))
                .collect(),
            span: decl.span.clone(),
        })
        .collect();
    let path = &ctx.symbol(id).expect("resolved above").path;
    json(&snap, &serde_json::json!({ "trait": path, "impls": entries }))
}

async fn rankings(State(state): State<Arc<AppState>>, Query(q): Query<GoalQuery>) -> ApiResult {
    let snap = state.snapshot();
    let goal = pick_goal(&snap, q.goal.as_deref())?;
    let ranked = snap.doc.rankings.get(&goal.label).cloned().unwrap_or_default();
    json(&snap, &serde_json::json!({ "goal": goal.label, "rankings": ranked }))
}

#[derive(Deserialize)]
struct SourceQuery {
    file: String,
    line: Option<u32>,
}

/// Source text of the served file, for jump-to-definition. Only files the
/// document's spans name are readable.
async fn source(State(state): State<Arc<AppState>>, Query(q): Query<SourceQuery>) -> ApiResult {
    let snap = state.snapshot();
    let served = state.path.display().to_string();
    if q.file != served {
        return Err(not_found(format!("`{}` is not part of this document", q.file)));
    }
    let lines = snap.source.lines().count().max(1) as u32;
    let line = q.line.unwrap_or(1);
    if line == 0 || line > lines {
        return Err(bad_request(format!("line {line} is outside 1..={lines}")));
    }
    json(
        &snap,
        &serde_json::json!({ "file": q.file, "line": line, "lines": lines, "text": snap.source }),
    )
}

/// Emits a `document` event carrying the generation after each re-solve.
async fn events(State(state): State<Arc<AppState>>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = state.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(generation) => {
                    let data = serde_json::json!({ "generation": generation }).to_string();
                    return Some((Ok(Event::default().event("document").data(data)), rx));
                }
                // Missed some; the next one still tells the client to refetch.
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}
