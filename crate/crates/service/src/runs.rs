//! Label-run records and their on-disk registry.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use nmt_core::pipeline::{RunStats, SOFT_FILE, STATS_FILE, STRICT_FILE, UNLABELED_FILE};
use nmt_core::teacher::SearchConfig;
use serde::{Deserialize, Serialize};

pub const RECORD_FILE: &str = "record.json";
pub const ARTIFACTS: [&str; 4] = [STRICT_FILE, SOFT_FILE, UNLABELED_FILE, STATS_FILE];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl RunStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, RunStatus::Done | RunStatus::Failed)
    }

    /// Allowed moves: queued to running, running to done or failed.
    pub fn can_move_to(self, next: RunStatus) -> bool {
        matches!(
            (self, next),
            (RunStatus::Queued, RunStatus::Running) | (RunStatus::Running, RunStatus::Done) | (RunStatus::Running, RunStatus::Failed)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub teacher_ids: Vec<String>,
    pub search: SearchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config: RunConfig,
    pub status: RunStatus,
    pub stats: Option<RunStats>,
    pub artifacts: Vec<PathBuf>,
    pub error: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run {0:?} not found")]
    Unknown(String),
    #[error("run {id}: cannot move from {from:?} to {to:?}")]
    Transition { id: String, from: RunStatus, to: RunStatus },
}

/// Run records keyed by id, mirrored to `<root>/<id>/record.json` on every
/// change. The mutex serializes all status updates.
#[derive(Debug)]
pub struct RunRegistry {
    root: PathBuf,
    runs: Mutex<BTreeMap<String, RunRecord>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RegistryError + '_ {
    move |source| RegistryError::Io { path: path.to_path_buf(), source }
}

fn persist(root: &Path, rec: &RunRecord) -> Result<(), RegistryError> {
    let dir = root.join(&rec.run_id);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let tmp = dir.join(format!("{RECORD_FILE}.tmp"));
    let body = serde_json::to_string_pretty(rec).expect("records serialize");
    fs::write(&tmp, body).map_err(io_err(&tmp))?;
    let path = dir.join(RECORD_FILE);
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

impl RunRegistry {
    /// Loads existing records. Runs left unfinished by a previous process
    /// are marked failed.
    pub fn open(root: &Path) -> Result<Self, RegistryError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        let mut runs = BTreeMap::new();
        for entry in fs::read_dir(root).map_err(io_err(root))? {
            let path = entry.map_err(io_err(root))?.path().join(RECORD_FILE);
            let Ok(text) = fs::read_to_string(&path) else { continue };
            let mut rec: RunRecord = match serde_json::from_str(&text) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("skipping {}: {e}", path.display());
                    continue;
                }
            };
            if !rec.status.is_terminal() {
                if rec.status == RunStatus::Queued {
                    rec.status = RunStatus::Running;
                }
                rec.status = RunStatus::Failed;
                rec.error = Some("interrupted by service restart".into());
                persist(root, &rec)?;
            }
            runs.insert(rec.run_id.clone(), rec);
        }
        Ok(RunRegistry { root: root.to_path_buf(), runs: Mutex::new(runs) })
    }

    pub fn run_dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn create(&self, config: RunConfig) -> Result<RunRecord, RegistryError> {
        let rec = RunRecord {
            run_id: uuid::Uuid::new_v4().simple().to_string(),
            config,
            status: RunStatus::Queued,
            stats: None,
            artifacts: Vec::new(),
            error: None,
        };
        let mut runs = self.runs.lock().expect("registry lock");
        persist(&self.root, &rec)?;
        runs.insert(rec.run_id.clone(), rec.clone());
        Ok(rec)
    }

    pub fn get(&self, id: &str) -> Option<RunRecord> {
        self.runs.lock().expect("registry lock").get(id).cloned()
    }

    /// Applies `update` and moves the run to `to`, refusing backward moves.
    pub fn advance(&self, id: &str, to: RunStatus, update: impl FnOnce(&mut RunRecord)) -> Result<RunRecord, RegistryError> {
        let mut runs = self.runs.lock().expect("registry lock");
        let rec = runs.get_mut(id).ok_or_else(|| RegistryError::Unknown(id.to_string()))?;
        if !rec.status.can_move_to(to) {
            return Err(RegistryError::Transition { id: id.to_string(), from: rec.status, to });
        }
        let mut next = rec.clone();
        update(&mut next);
        next.status = to;
        persist(&self.root, &next)?;
        *rec = next.clone();
        Ok(next)
    }
}
