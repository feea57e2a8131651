//! Building teachers from explanations and persisting them.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::corpus::{Corpus, Instance};
use crate::semparser::{parse_explanation, Diagnostics, Explanation, ExplanationRecord, LfSyntaxError, Lexicon, LogicalForm};

use super::engine::Engine;
use super::program::{CompileError, TeacherProgram};

#[derive(Debug, thiserror::Error)]
pub enum TeacherError {
    #[error("explanation rejected: {0}")]
    Explanation(#[from] Diagnostics),
    #[error("compile failed: {0}")]
    Compile(#[from] CompileError),
    #[error("reference instance {0:?} not found")]
    MissingReference(String),
    #[error("logical form {index}: {source}")]
    Form {
        index: usize,
        #[source]
        source: LfSyntaxError,
    },
    #[error("{}line {line}: {message}", .path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Jsonl { path: Option<PathBuf>, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Serialized form of a compiled teacher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherBundle {
    pub id: String,
    pub instance_id: String,
    pub raw_text: String,
    pub variable_defs: IndexMap<String, String>,
    pub logical_forms: Vec<String>,
    pub validated: bool,
}

impl TeacherProgram {
    pub fn to_bundle(&self) -> TeacherBundle {
        TeacherBundle {
            id: self.id.clone(),
            instance_id: self.explanation.instance_id.clone(),
            raw_text: self.explanation.raw_text.clone(),
            variable_defs: self.explanation.variable_defs.clone(),
            logical_forms: self.forms.iter().map(|f| f.to_string()).collect(),
            validated: self.validated,
        }
    }
}

/// Parses, compiles and validates one explanation against its reference.
pub fn build_teacher(rec: &ExplanationRecord, lex: &Lexicon, reference: Arc<Instance>, engine: &Engine) -> Result<TeacherProgram, TeacherError> {
    let expl = Explanation::from_record(rec)?;
    let forms = parse_explanation(&expl, lex)?;
    let mut prog = TeacherProgram::compile(expl, forms, reference)?;
    prog.validated = engine.validate(&prog);
    Ok(prog)
}

/// Builds every teacher whose reference is in `corpus`. Failures are
/// returned alongside the explanation id.
pub fn build_teachers(
    records: &[ExplanationRecord],
    lex: &Lexicon,
    corpus: &Corpus,
    engine: &Engine,
) -> (Vec<TeacherProgram>, Vec<(String, TeacherError)>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for rec in records {
        let res = corpus
            .get(&rec.instance_id)
            .cloned()
            .ok_or_else(|| TeacherError::MissingReference(rec.instance_id.clone()))
            .and_then(|r| build_teacher(rec, lex, r, engine));
        match res {
            Ok(p) => ok.push(p),
            Err(e) => failed.push((rec.id.clone(), e)),
        }
    }
    (ok, failed)
}

/// Recompiles a stored bundle. Validation is recomputed, not trusted.
pub fn from_bundle(b: &TeacherBundle, corpus: &Corpus, engine: &Engine) -> Result<TeacherProgram, TeacherError> {
    let reference = corpus.get(&b.instance_id).cloned().ok_or_else(|| TeacherError::MissingReference(b.instance_id.clone()))?;
    let expl = Explanation::new(b.id.clone(), b.instance_id.clone(), &b.raw_text)?;
    let forms = b
        .logical_forms
        .iter()
        .enumerate()
        .map(|(index, s)| s.parse::<LogicalForm>().map_err(|source| TeacherError::Form { index, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut prog = TeacherProgram::compile(expl, forms, reference)?;
    prog.validated = engine.validate(&prog);
    if prog.validated != b.validated {
        log::warn!("teacher {}: stored validation flag {} disagrees with recomputed {}", b.id, b.validated, prog.validated);
    }
    Ok(prog)
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, TeacherError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| TeacherError::Jsonl { path: None, line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, TeacherError> {
    fs::read_to_string(path).map_err(|source| TeacherError::Io { path: path.to_path_buf(), source })
}

fn with_path(e: TeacherError, path: &Path) -> TeacherError {
    match e {
        TeacherError::Jsonl { line, message, .. } => TeacherError::Jsonl { path: Some(path.to_path_buf()), line, message },
        other => other,
    }
}

pub fn parse_explanation_records(text: &str) -> Result<Vec<ExplanationRecord>, TeacherError> {
    parse_jsonl(text)
}

pub fn load_explanation_records(path: &Path) -> Result<Vec<ExplanationRecord>, TeacherError> {
    parse_jsonl(&read(path)?).map_err(|e| with_path(e, path))
}

pub fn parse_bundles(text: &str) -> Result<Vec<TeacherBundle>, TeacherError> {
    parse_jsonl(text)
}

pub fn load_bundles(path: &Path) -> Result<Vec<TeacherBundle>, TeacherError> {
    parse_jsonl(&read(path)?).map_err(|e| with_path(e, path))
}

pub fn write_bundles(progs: &[TeacherProgram], path: &Path) -> Result<(), TeacherError> {
    let mut buf = String::new();
    for p in progs {
        buf.push_str(&serde_json::to_string(&p.to_bundle()).expect("bundle serializes"));
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|source| TeacherError::Io { path: path.to_path_buf(), source })
}
