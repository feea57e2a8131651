use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use nmt_core::fixtures;
use nmt_core::semparser::Lexicon;
use nmt_core::teacher::SearchConfig;
use nmt_service::{router, AppState, ErrorBody, RunRecord, RunStatus};
use serde_json::{json, Value};
use tower::ServiceExt;

fn state(dir: &std::path::Path) -> Arc<AppState> {
    Arc::new(AppState::open(fixtures::corpus(), Lexicon::builtin(), SearchConfig::default(), dir).unwrap())
}

async fn call(st: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router(st.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into())) };
    (status, v)
}

fn table1() -> Value {
    let rec = fixtures::explanation("table1");
    json!({"explanation": {"instance_id": rec.instance_id, "text": rec.text}})
}

async fn add_teacher(st: &Arc<AppState>, body: Value) -> String {
    let (s, v) = call(st, "POST", "/teacher", Some(body)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    v["teacher_id"].as_str().unwrap().to_string()
}

async fn wait_done(st: &Arc<AppState>, id: &str) -> RunRecord {
    for _ in 0..600 {
        let (s, v) = call(st, "GET", &format!("/run/{id}"), None).await;
        assert_eq!(s, StatusCode::OK);
        let rec: RunRecord = serde_json::from_value(v).unwrap();
        if rec.status == RunStatus::Done || rec.status == RunStatus::Failed {
            return rec;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    panic!("run {id} did not finish");
}

#[tokio::test]
async fn parse_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path());
    let text = fixtures::explanation("table1").text;
    let (s, v) = call(&st, "POST", "/parse", Some(json!({"text": text, "instance_id": "ref-funeral"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["variables"].as_object().unwrap().len(), 2);
    let sentences = v["sentences"].as_array().unwrap();
    assert_eq!(sentences.len(), 6);
    assert!(sentences.iter().all(|s| s["parse"].is_string()));
    assert_eq!(v["parsable"], true);

    let (s, v) = call(&st, "POST", "/parse", Some(json!({"text": "Blorp zax quuxes the wibble.", "instance_id": "ref-funeral"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["sentences"][0]["error"].is_string());
    assert_eq!(v["parsable"], false);

    let (s, v) = call(&st, "POST", "/parse", Some(json!({"instance_id": "ref-funeral"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let e: ErrorBody = serde_json::from_value(v).unwrap();
    assert_eq!(e.code, "bad_request");

    let (s, _) = call(&st, "POST", "/parse", Some(json!({"text": text, "instance_id": "nope"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn teacher_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path());
    let (s, v) = call(&st, "POST", "/teacher", Some(table1())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["validated"], true);
    assert_eq!(v["z_on_reference"], 1.0);
    assert!(v["reference_answer"].is_string());
    let id = v["teacher_id"].clone();
    let (_, again) = call(&st, "POST", "/teacher", Some(table1())).await;
    assert_eq!(again["teacher_id"], id);

    let bad = json!({"explanation": {"instance_id": "independence", "text": "X is \"declared\". The answer is directly before X."}});
    let (s, v) = call(&st, "POST", "/teacher", Some(bad)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["validated"], false);

    let gibberish = json!({"explanation": {"instance_id": "independence", "text": "Blorp zax quuxes the wibble."}});
    let (s, v) = call(&st, "POST", "/teacher", Some(gibberish)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(!v["details"].as_array().unwrap().is_empty());

    let (s, _) = call(&st, "POST", "/teacher", Some(json!({"explanation": {"instance_id": "nope", "text": "x"}}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn teachers_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id = add_teacher(&state(dir.path()), table1()).await;
    let st = state(dir.path());
    assert!(st.teacher(&id).unwrap().validated);
}

#[tokio::test]
async fn match_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path());
    let id = add_teacher(&st, table1()).await;
    let (s, v) = call(&st, "POST", "/match", Some(json!({"teacher_id": id, "limit": 10}))).await;
    assert_eq!(s, StatusCode::OK);
    let m = v["matches"].as_array().unwrap();
    let find = |iid: &str| m.iter().find(|x| x["instance_id"] == iid).cloned().unwrap();
    assert_eq!(find("independence")["z"], 1.0);
    assert_eq!(find("independence")["strict"], true);
    assert_eq!(find("independence")["answer_text"], "24 September 1973");
    assert_eq!(find("brazelton")["z"], 0.9375);
    assert_eq!(find("brazelton")["strict"], false);

    let (_, v) = call(&st, "POST", "/match", Some(json!({"teacher_id": id, "limit": 0}))).await;
    assert!(v["matches"].as_array().unwrap().is_empty());

    let (_, v) = call(&st, "POST", "/match", Some(json!({"teacher_id": id, "limit": 10, "threshold": 1.0}))).await;
    let m = v["matches"].as_array().unwrap();
    assert!(!m.is_empty());
    assert!(m.iter().all(|x| x["strict"] == true));

    let (_, v) = call(&st, "POST", "/match", Some(json!({"teacher_id": id, "limit": 1}))).await;
    assert_eq!(v["matches"].as_array().unwrap().len(), 1);

    let bad = json!({"explanation": {"instance_id": "independence", "text": "X is \"declared\". The answer is directly before X."}});
    let unvalidated = add_teacher(&st, bad).await;
    let (s, v) = call(&st, "POST", "/match", Some(json!({"teacher_id": unvalidated, "limit": 10}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["code"], "conflict");

    let (s, _) = call(&st, "POST", "/match", Some(json!({"teacher_id": "missing", "limit": 10}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn label_runs() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path());
    let mut ids = Vec::new();
    for e in ["table1", "filmfest", "estonia", "hydrogen"] {
        let rec = fixtures::explanation(e);
        ids.push(add_teacher(&st, json!({"explanation": {"instance_id": rec.instance_id, "text": rec.text}})).await);
    }
    let (s, v) = call(&st, "POST", "/label-run", Some(json!({"teacher_ids": ids}))).await;
    assert_eq!(s, StatusCode::OK);
    let run = v["run_id"].as_str().unwrap().to_string();
    let (_, v2) = call(&st, "POST", "/label-run", Some(json!({"teacher_ids": ids}))).await;
    assert_ne!(v2["run_id"].as_str().unwrap(), run);

    let rec = wait_done(&st, &run).await;
    assert_eq!(rec.status, RunStatus::Done);
    assert_eq!(rec.artifacts.len(), 4);
    assert!(rec.artifacts.iter().all(|p| p.exists()));
    let stats = rec.stats.unwrap();
    assert_eq!(stats.strict, 2);
    assert_eq!(stats.soft, 2);

    let (s, files) = call(&st, "GET", &format!("/run/{run}/splits"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(files["strict.jsonl"].as_str().unwrap().contains("24 September 1973"));
    let (s, raw) = call(&st, "GET", &format!("/run/{run}/splits/soft.jsonl"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(raw, files["soft.jsonl"]);
    let (s, _) = call(&st, "GET", &format!("/run/{run}/splits/other.txt"), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, _) = call(&st, "GET", "/run/unknown", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&st, "POST", "/label-run", Some(json!({"teacher_ids": ["missing"]}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn run_without_teachers_labels_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path());
    let (_, v) = call(&st, "POST", "/label-run", Some(json!({"teacher_ids": [], "config": {"threshold": 0.5}}))).await;
    let rec = wait_done(&st, v["run_id"].as_str().unwrap()).await;
    assert_eq!(rec.status, RunStatus::Done);
    let stats = rec.stats.unwrap();
    assert_eq!(stats.strict + stats.soft, 0);
    assert_eq!(stats.unlabeled, fixtures::corpus().len());
    assert_eq!(rec.config.search.threshold, 0.5);

    let (s, _) = call(&st, "POST", "/label-run", Some(json!({"teacher_ids": [], "config": {"bogus": 1}}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}
