use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use traitscope::engine::SolveConfig;
use traitscope_cli::server::{router, AppState, GENERATION_HEADER};

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn bevy() -> Arc<AppState> {
    AppState::load(fixture("bevy.tl"), SolveConfig::default()).unwrap()
}

async fn get(state: &Arc<AppState>, uri: &str) -> (StatusCode, Value) {
    let resp = router(state.clone())
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn goals_lists_the_failing_goal() {
    let (status, body) = get(&bevy(), "/api/goals").await;
    assert_eq!(status, StatusCode::OK);
    let goals = body.as_array().unwrap();
    assert_eq!(goals.len(), 1);
    assert_eq!(goals[0]["label"], "add_systems");
    assert_eq!(goals[0]["result"], "no");
}

#[tokio::test]
async fn node_has_short_and_qualified_text() {
    let state = bevy();
    let (_, ranks) = get(&state, "/api/rankings?goal=add_systems").await;
    let first = ranks["rankings"]["inertia"][0].as_u64().unwrap();
    let (status, body) = get(&state, &format!("/api/node/{first}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["node"]["predicate"]["short"], "Timer: SystemParam");
    assert_eq!(body["node"]["predicate"]["qualified"], "app::Timer: bevy::SystemParam");
    let (status, _) = get(&state, "/api/node/9999?goal=add_systems").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn every_referenced_node_resolves() {
    let state = bevy();
    let (_, doc) = get(&state, "/api/tree?goal=add_systems").await;
    let nodes = doc["goals"][0]["nodes"].as_object().unwrap();
    for id in nodes.keys() {
        let (status, body) = get(&state, &format!("/api/node/{id}?goal=add_systems")).await;
        assert_eq!(status, StatusCode::OK, "node {id}");
        assert_eq!(body["node"]["depth"], nodes[id]["depth"]);
    }
}

#[tokio::test]
async fn impls_lists_system_param_heads_with_spans() {
    let (status, body) = get(&bevy(), "/api/impls?trait=SystemParam").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["trait"], "bevy::SystemParam");
    let impls = body["impls"].as_array().unwrap();
    assert_eq!(impls.len(), 1);
    assert_eq!(impls[0]["head_short"], "impl<T> SystemParam for ResMut<..>");
    assert_eq!(impls[0]["head_qualified"], "impl<T> bevy::SystemParam for bevy::ResMut<T>");
    assert_eq!(impls[0]["where_clauses"][0], "T: Resource");
    assert!(impls[0]["span"]["line_start"].as_u64().unwrap() > 0);
    let (status, _) = get(&bevy(), "/api/impls?trait=Timer").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn tree_fragment_and_whole_document() {
    let state = bevy();
    let (_, whole) = get(&state, "/api/tree").await;
    assert_eq!(whole["schema_version"], "1");
    let (_, one) = get(&state, "/api/tree?goal=add_systems").await;
    assert_eq!(one, whole);
    let (status, _) = get(&state, "/api/tree?goal=nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn source_is_limited_to_the_served_file() {
    let state = bevy();
    let file = fixture("bevy.tl").display().to_string();
    let (status, body) = get(&state, &format!("/api/source?file={file}&line=3")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["text"].as_str().unwrap().contains("trait SystemParam;"));
    let (status, _) = get(&state, "/api/source?file=/etc/passwd&line=1").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = get(&state, &format!("/api/source?file={file}&line=100000")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn several_goals_need_a_label() {
    let state = AppState::load(fixture("trivial.tl"), SolveConfig::default()).unwrap();
    let (status, _) = get(&state, "/api/node/0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = get(&state, "/api/node/0?goal=lives").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["node"]["result"], "yes");
}

#[tokio::test]
async fn edits_are_re_solved_and_announced() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("prog.tl");
    std::fs::write(&file, "trait Tr; newtype A = unit; goal g: A: Tr;\n").unwrap();
    let state = AppState::load(&file, SolveConfig::default()).unwrap();

    let resp = router(state.clone())
        .oneshot(Request::get("/api/events").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    let mut body = resp.into_body();

    // Unchanged text is not a new generation.
    assert_eq!(state.reload().unwrap(), None);
    std::fs::write(&file, "trait Tr; newtype A = unit; impl Tr for A; goal g: A: Tr;\n").unwrap();
    assert_eq!(state.reload().unwrap(), Some(1));

    let frame = body.frame().await.unwrap().unwrap();
    let text = String::from_utf8(frame.into_data().unwrap().to_vec()).unwrap();
    assert!(text.contains("event: document"), "{text}");
    assert!(text.contains("\"generation\":1"), "{text}");

    let (_, goals) = get(&state, "/api/goals").await;
    assert_eq!(goals[0]["result"], "yes");

    // A broken edit keeps serving the last good document.
    std::fs::write(&file, "trait ;\n").unwrap();
    assert_eq!(state.reload().unwrap_err().code, 2);
    assert_eq!(state.snapshot().generation, 1);
}

#[tokio::test]
async fn responses_carry_their_generation() {
    let resp = router(bevy())
        .oneshot(Request::get("/api/goals").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.headers()[GENERATION_HEADER], "0");
}
