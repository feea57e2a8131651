//! HTTP front end: explanation parsing, teacher authoring, match previews
//! and background label runs.

pub mod error;
pub mod runs;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use nmt_core::corpus::Corpus;
use nmt_core::pipeline::label_to_dir;
use nmt_core::semparser::{parse_sentences, tokenize_sentence, Explanation, ExplanationRecord, Lexicon};
use nmt_core::teacher::{build_teacher, from_bundle, parse_bundles, teacher_id, Engine, SearchConfig, TeacherError, TeacherProgram};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use error::{ApiError, ErrorBody};
pub use runs::{RunConfig, RunRecord, RunRegistry, RunStatus, ARTIFACTS};

const TEACHER_DIR: &str = "teachers";
const RUN_DIR: &str = "runs";

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Registry(#[from] runs::RegistryError),
    #[error(transparent)]
    Teacher(#[from] TeacherError),
}

/// Shared, read-mostly service state.
pub struct AppState {
    pub corpus: Arc<Corpus>,
    pub lexicon: Arc<Lexicon>,
    pub search: SearchConfig,
    pub data_dir: PathBuf,
    teachers: RwLock<BTreeMap<String, Arc<TeacherProgram>>>,
    runs: RunRegistry,
}

impl AppState {
    /// Opens `data_dir`, reloading stored teachers and run records.
    pub fn open(corpus: Corpus, lexicon: Lexicon, search: SearchConfig, data_dir: &Path) -> Result<Self, StartupError> {
        let teacher_dir = data_dir.join(TEACHER_DIR);
        fs::create_dir_all(&teacher_dir).map_err(|source| StartupError::Io { path: teacher_dir.clone(), source })?;
        let engine = Engine::new(search.clone());
        let mut teachers = BTreeMap::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&teacher_dir)
            .map_err(|source| StartupError::Io { path: teacher_dir.clone(), source })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|source| StartupError::Io { path: path.clone(), source })?;
            for b in parse_bundles(&text)? {
                match from_bundle(&b, &corpus, &engine) {
                    Ok(p) => {
                        teachers.insert(p.id.clone(), Arc::new(p));
                    }
                    Err(e) => log::warn!("skipping stored teacher {}: {e}", b.id),
                }
            }
        }
        let runs = RunRegistry::open(&data_dir.join(RUN_DIR))?;
        Ok(AppState {
            corpus: Arc::new(corpus),
            lexicon: Arc::new(lexicon),
            search,
            data_dir: data_dir.to_path_buf(),
            teachers: RwLock::new(teachers),
            runs,
        })
    }

    pub fn teacher(&self, id: &str) -> Option<Arc<TeacherProgram>> {
        self.teachers.read().expect("teacher lock").get(id).cloned()
    }

    pub fn run(&self, id: &str) -> Option<RunRecord> {
        self.runs.get(id)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/parse", post(parse))
        .route("/teacher", post(teacher))
        .route("/match", post(matches))
        .route("/label-run", post(label_run))
        .route("/run/{id}", get(run_record))
        .route("/run/{id}/splits", get(run_splits))
        .route("/run/{id}/splits/{file}", get(run_split_file))
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Reads a JSON body; any malformed or mistyped body is a 400.
fn body<T: DeserializeOwned>(raw: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(raw).map_err(|e| ApiError::BadRequest(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParseRequest {
    pub text: String,
    pub instance_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SentenceResult {
    pub text: String,
    pub tokens: Vec<String>,
    /// Top-ranked logical form, when the sentence parses.
    pub parse: Option<String>,
    /// Token positions the top parse leaves out.
    pub skipped: Vec<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ParseResponse {
    pub variables: BTreeMap<String, String>,
    pub sentences: Vec<SentenceResult>,
    pub parsable: bool,
}

async fn parse(State(st): State<Arc<AppState>>, raw: Bytes) -> Result<Json<ParseResponse>, ApiError> {
    let req: ParseRequest = body(&raw)?;
    let instance_id = req.instance_id.unwrap_or_default();
    if !instance_id.is_empty() && st.corpus.get(&instance_id).is_none() {
        return Err(ApiError::not_found("instance", instance_id));
    }
    let expl = Explanation::new("", instance_id, &req.text).map_err(|d| ApiError::Unprocessable {
        message: "explanation rejected".into(),
        details: d.issues.iter().map(|i| i.to_string()).collect(),
    })?;
    let sentences: Vec<SentenceResult> = parse_sentences(&expl, &st.lexicon)
        .into_iter()
        .map(|sp| {
            let tokens = tokenize_sentence(&sp.text).iter().map(|t| t.to_string()).collect();
            match sp.parses.first() {
                Some(p) => SentenceResult { text: sp.text.clone(), tokens, parse: Some(p.lf.to_string()), skipped: p.skipped.clone(), error: None },
                None => SentenceResult { text: sp.text.clone(), tokens, parse: None, skipped: Vec::new(), error: Some("no parse covers this sentence".into()) },
            }
        })
        .collect();
    let parsable = !sentences.is_empty() && sentences.iter().all(|s| s.parse.is_some());
    Ok(Json(ParseResponse { variables: expl.variable_defs.into_iter().collect(), sentences, parsable }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherRequest {
    pub explanation: ExplanationInput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplanationInput {
    pub instance_id: String,
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TeacherResponse {
    pub teacher_id: String,
    pub validated: bool,
    pub reference_answer: Option<String>,
    pub z_on_reference: f64,
}

fn teacher_response(st: &AppState, p: &TeacherProgram) -> TeacherResponse {
    let engine = Engine::new(st.search.clone());
    let ans = engine.answer_mode(p, &p.reference, false);
    TeacherResponse {
        teacher_id: p.id.clone(),
        validated: p.validated,
        reference_answer: ans.as_ref().map(|a| a.text.clone()),
        z_on_reference: ans.map_or(0.0, |a| a.z),
    }
}

async fn teacher(State(st): State<Arc<AppState>>, raw: Bytes) -> Result<Json<TeacherResponse>, ApiError> {
    let req: TeacherRequest = body(&raw)?;
    let ExplanationInput { instance_id, text } = req.explanation;
    let id = teacher_id(&instance_id, &text);
    if let Some(p) = st.teacher(&id) {
        return Ok(Json(teacher_response(&st, &p)));
    }
    let reference = st.corpus.get(&instance_id).cloned().ok_or_else(|| ApiError::not_found("instance", instance_id.clone()))?;
    let state = st.clone();
    let prog = tokio::task::spawn_blocking(move || {
        let rec = ExplanationRecord { id: id.clone(), instance_id, text };
        build_teacher(&rec, &state.lexicon, reference, &Engine::new(state.search.clone()))
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
    .map_err(|e| match e {
        TeacherError::Explanation(d) => ApiError::Unprocessable {
            message: "explanation is not parsable".into(),
            details: d.issues.iter().map(|i| i.to_string()).collect(),
        },
        other => ApiError::Unprocessable { message: other.to_string(), details: Vec::new() },
    })?;

    let path = st.data_dir.join(TEACHER_DIR).join(format!("{}.json", prog.id));
    let line = serde_json::to_string(&prog.to_bundle()).expect("bundles serialize") + "\n";
    fs::write(&path, line).map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))?;
    let prog = Arc::new(prog);
    st.teachers.write().expect("teacher lock").insert(prog.id.clone(), prog.clone());
    Ok(Json(teacher_response(&st, &prog)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRequest {
    pub teacher_id: String,
    #[serde(default = "default_limit")]
    pub limit: usize,
    pub threshold: Option<f64>,
}

fn default_limit() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub instance_id: String,
    pub answer_text: String,
    pub z: f64,
    pub strict: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MatchResponse {
    pub matches: Vec<Match>,
}

/// First `limit` instances, in corpus order, that the teacher labels with
/// `z >= threshold`. The teacher's own reference is skipped.
pub fn preview_matches(corpus: &Corpus, prog: &TeacherProgram, search: &SearchConfig, limit: usize, threshold: f64) -> Vec<Match> {
    let mut cfg = search.clone();
    // The engine keeps only z strictly above its threshold.
    cfg.threshold = (threshold - 1e-9).max(0.0);
    let engine = Engine::new(cfg);
    let mut out = Vec::new();
    for inst in corpus.iter() {
        if out.len() >= limit {
            break;
        }
        if inst.id == prog.reference.id {
            continue;
        }
        if let Some(a) = engine.answer(prog, inst).filter(|a| a.z >= threshold) {
            out.push(Match { instance_id: inst.id.clone(), answer_text: a.text, z: a.z, strict: a.z >= 1.0 });
        }
    }
    out
}

async fn matches(State(st): State<Arc<AppState>>, raw: Bytes) -> Result<Json<MatchResponse>, ApiError> {
    let req: MatchRequest = body(&raw)?;
    let threshold = req.threshold.unwrap_or(st.search.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ApiError::BadRequest(format!("threshold {threshold} is outside [0, 1]")));
    }
    let prog = st.teacher(&req.teacher_id).ok_or_else(|| ApiError::not_found("teacher", req.teacher_id.clone()))?;
    if !prog.validated {
        return Err(ApiError::Conflict(format!("teacher {} is not validated on its reference", prog.id)));
    }
    let state = st.clone();
    let found = tokio::task::spawn_blocking(move || preview_matches(&state.corpus, &prog, &state.search, req.limit, threshold))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(MatchResponse { matches: found }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRunRequest {
    pub teacher_ids: Vec<String>,
    #[serde(default)]
    pub config: Option<SearchConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LabelRunResponse {
    pub run_id: String,
}

fn execute_run(st: &AppState, run_id: &str, programs: &[TeacherProgram], search: SearchConfig) {
    if let Err(e) = st.runs.advance(run_id, RunStatus::Running, |_| {}) {
        log::error!("{e}");
        return;
    }
    let dir = st.runs.run_dir(run_id);
    let result = label_to_dir(programs, &st.corpus, &Engine::new(search), &dir);
    let outcome = match result {
        Ok(stats) => st.runs.advance(run_id, RunStatus::Done, |r| {
            r.stats = Some(stats);
            r.artifacts = ARTIFACTS.iter().map(|f| dir.join(f)).collect();
        }),
        Err(e) => st.runs.advance(run_id, RunStatus::Failed, |r| r.error = Some(e.to_string())),
    };
    if let Err(e) = outcome {
        log::error!("{e}");
    }
}

async fn label_run(State(st): State<Arc<AppState>>, raw: Bytes) -> Result<Json<LabelRunResponse>, ApiError> {
    let req: LabelRunRequest = body(&raw)?;
    let mut programs = Vec::new();
    for id in &req.teacher_ids {
        let p = st.teacher(id).ok_or_else(|| ApiError::not_found("teacher", id.clone()))?;
        if !p.validated {
            return Err(ApiError::Conflict(format!("teacher {id} is not validated on its reference")));
        }
        programs.push(TeacherProgram::clone(&p));
    }
    let search = req.config.unwrap_or_else(|| st.search.clone());
    let rec = st
        .runs
        .create(RunConfig { teacher_ids: req.teacher_ids, search: search.clone() })
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    let run_id = rec.run_id.clone();
    let state = st.clone();
    tokio::task::spawn_blocking(move || execute_run(&state, &run_id, &programs, search));
    Ok(Json(LabelRunResponse { run_id: rec.run_id }))
}

async fn run_record(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<RunRecord>, ApiError> {
    st.run(&id).map(Json).ok_or_else(|| ApiError::not_found("run", id))
}

fn finished_run(st: &AppState, id: &str) -> Result<RunRecord, ApiError> {
    let rec = st.run(id).ok_or_else(|| ApiError::not_found("run", id))?;
    if rec.status != RunStatus::Done {
        return Err(ApiError::Conflict(format!("run {id} is {:?}, artifacts are available once it is done", rec.status)));
    }
    Ok(rec)
}

/// All four artifacts in one JSON object, keyed by file name.
async fn run_splits(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<BTreeMap<String, String>>, ApiError> {
    finished_run(&st, &id)?;
    let dir = st.runs.run_dir(&id);
    let mut out = BTreeMap::new();
    for name in ARTIFACTS {
        let path = dir.join(name);
        let text = fs::read_to_string(&path).map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))?;
        out.insert(name.to_string(), text);
    }
    Ok(Json(out))
}

async fn run_split_file(State(st): State<Arc<AppState>>, UrlPath((id, file)): UrlPath<(String, String)>) -> Result<impl IntoResponse, ApiError> {
    finished_run(&st, &id)?;
    if !ARTIFACTS.contains(&file.as_str()) {
        return Err(ApiError::not_found("artifact", file));
    }
    let path = st.runs.run_dir(&id).join(&file);
    let bytes = fs::read(&path).map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))?;
    let ty = if file.ends_with(".jsonl") { "application/x-ndjson" } else { "application/json" };
    Ok(([(header::CONTENT_TYPE, ty), (header::CONTENT_DISPOSITION, "attachment")], bytes))
}
