//! Corpus labeling into strict, soft and unlabeled splits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::corpus::Corpus;
use crate::teacher::{Engine, TeacherProgram};

pub const STRICT_FILE: &str = "strict.jsonl";
pub const SOFT_FILE: &str = "soft.jsonl";
pub const UNLABELED_FILE: &str = "unlabeled.jsonl";
pub const STATS_FILE: &str = "stats.json";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictEntry {
    pub instance_id: String,
    pub answer_text: String,
    pub char_start: usize,
    pub char_end: usize,
    pub teacher_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftEntry {
    pub instance_id: String,
    pub answer_text: String,
    pub char_start: usize,
    pub char_end: usize,
    pub teacher_id: String,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlabeledEntry {
    pub instance_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledSplits {
    pub strict: Vec<StrictEntry>,
    pub soft: Vec<SoftEntry>,
    pub unlabeled: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherCounts {
    pub strict: usize,
    pub soft: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub scanned: usize,
    pub strict: usize,
    pub soft: usize,
    pub unlabeled: usize,
    pub teachers: usize,
    pub per_teacher: BTreeMap<String, TeacherCounts>,
    pub question_heads: BTreeMap<String, f64>,
    /// Not written to `stats.json`, which must be reproducible byte for byte.
    #[serde(skip)]
    pub wall_time_ms: u64,
}

fn round6(z: f64) -> f64 {
    (z * 1e6).round() / 1e6
}

/// Runs the validated teachers over every non-reference instance.
pub fn label_corpus(programs: &[TeacherProgram], corpus: &Corpus, engine: &Engine) -> LabeledSplits {
    let progs: Vec<TeacherProgram> = programs.iter().filter(|p| p.validated).cloned().collect();
    let references: BTreeSet<&str> = programs.iter().map(|p| p.reference.id.as_str()).collect();
    let scan: Vec<_> = corpus.iter().filter(|i| !references.contains(i.id.as_str())).collect();
    let results: Vec<_> = scan.par_iter().map(|inst| engine.ensemble_answer(&progs, inst)).collect();

    let t = engine.config.threshold;
    let mut splits = LabeledSplits::default();
    for (inst, ans) in scan.iter().zip(results) {
        match ans {
            Some(a) if a.z >= 1.0 => {
                let (char_start, char_end) = a.span.char_range(&inst.context);
                splits.strict.push(StrictEntry { instance_id: inst.id.clone(), answer_text: a.text, char_start, char_end, teacher_id: a.teacher_id });
            }
            other => {
                splits.unlabeled.push(inst.id.clone());
                if let Some(a) = other.filter(|a| a.z > t) {
                    let (char_start, char_end) = a.span.char_range(&inst.context);
                    splits.soft.push(SoftEntry {
                        instance_id: inst.id.clone(),
                        answer_text: a.text,
                        char_start,
                        char_end,
                        teacher_id: a.teacher_id,
                        z: round6(a.z),
                    });
                }
            }
        }
    }
    splits
}

/// Fraction of strict-split questions by their first two lowercased tokens.
pub fn question_head_histogram(splits: &LabeledSplits, corpus: &Corpus) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for e in &splits.strict {
        let Some(inst) = corpus.get(&e.instance_id) else { continue };
        let head: Vec<&str> = inst.question.lowers().into_iter().take(2).collect();
        *counts.entry(head.join(" ")).or_default() += 1;
        total += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
}

pub fn run_stats(splits: &LabeledSplits, corpus: &Corpus, programs: &[TeacherProgram]) -> RunStats {
    let mut per_teacher: BTreeMap<String, TeacherCounts> = programs.iter().filter(|p| p.validated).map(|p| (p.id.clone(), TeacherCounts::default())).collect();
    for e in &splits.strict {
        per_teacher.entry(e.teacher_id.clone()).or_default().strict += 1;
    }
    for e in &splits.soft {
        per_teacher.entry(e.teacher_id.clone()).or_default().soft += 1;
    }
    RunStats {
        scanned: splits.strict.len() + splits.unlabeled.len(),
        strict: splits.strict.len(),
        soft: splits.soft.len(),
        unlabeled: splits.unlabeled.len(),
        teachers: per_teacher.len(),
        per_teacher,
        question_heads: question_head_histogram(splits, corpus),
        wall_time_ms: 0,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(&it).expect("entries serialize"));
        out.push('\n');
    }
    out
}

/// Writes the three split files and `stats.json` into `dir`.
pub fn export_splits(splits: &LabeledSplits, stats: &RunStats, dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = [
        (STRICT_FILE, jsonl(&splits.strict)),
        (SOFT_FILE, jsonl(&splits.soft)),
        (UNLABELED_FILE, jsonl(splits.unlabeled.iter().map(|id| UnlabeledEntry { instance_id: id.clone() }))),
        (STATS_FILE, serde_json::to_string_pretty(stats).expect("stats serialize") + "\n"),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Labels `corpus` and writes the splits into `dir`.
pub fn label_to_dir(programs: &[TeacherProgram], corpus: &Corpus, engine: &Engine, dir: &Path) -> Result<RunStats, PipelineError> {
    let started = Instant::now();
    let splits = label_corpus(programs, corpus, engine);
    let mut stats = run_stats(&splits, corpus, programs);
    stats.wall_time_ms = started.elapsed().as_millis() as u64;
    export_splits(&splits, &stats, dir)?;
    Ok(stats)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| PipelineError::Parse { path: path.to_path_buf(), line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn import_splits(dir: &Path) -> Result<LabeledSplits, PipelineError> {
    let unlabeled: Vec<UnlabeledEntry> = read_jsonl(&dir.join(UNLABELED_FILE))?;
    Ok(LabeledSplits {
        strict: read_jsonl(&dir.join(STRICT_FILE))?,
        soft: read_jsonl(&dir.join(SOFT_FILE))?,
        unlabeled: unlabeled.into_iter().map(|u| u.instance_id).collect(),
    })
}

pub fn import_stats(dir: &Path) -> Result<RunStats, PipelineError> {
    let path = dir.join(STATS_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Parse { path, line: e.line(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round6(35.0 / 36.0), 0.972222);
        assert_eq!(round6(0.9375), 0.9375);
    }
}
