//! SQuAD v1.1 ingestion and the JSONL instance cache.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::instance::{Alignment, Corpus, Instance};
use super::CorpusError;

#[derive(Debug, Deserialize)]
struct SquadFile {
    data: Vec<Article>,
}

#[derive(Debug, Deserialize)]
struct Article {
    paragraphs: Vec<Paragraph>,
}

#[derive(Debug, Deserialize)]
struct Paragraph {
    context: String,
    qas: Vec<Qa>,
}

#[derive(Debug, Deserialize)]
struct Qa {
    id: String,
    question: String,
    #[serde(default)]
    answers: Vec<SquadAnswer>,
}

#[derive(Debug, Deserialize)]
struct SquadAnswer {
    text: String,
    answer_start: usize,
}

/// A per-instance problem that did not stop ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub instance_id: String,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct SquadLoad {
    pub instances: Vec<Instance>,
    pub warnings: Vec<IngestWarning>,
    /// Every reference answer string per question id.
    pub answers: BTreeMap<String, Vec<String>>,
}

impl SquadLoad {
    pub fn into_corpus(self) -> Corpus {
        self.instances.into_iter().collect()
    }
}

pub fn load_squad(path: &Path) -> Result<SquadLoad, CorpusError> {
    let raw = fs::read(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_squad(&raw).map_err(|e| e.with_path(path))
}

/// Parses SQuAD JSON bytes. The first listed answer becomes the gold span.
pub fn parse_squad(raw: &[u8]) -> Result<SquadLoad, CorpusError> {
    let file: SquadFile = serde_json::from_slice(raw).map_err(|e| CorpusError::Json {
        path: None,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut out = SquadLoad::default();
    for article in file.data {
        for para in article.paragraphs {
            let ctx_chars = para.context.chars().count();
            for qa in para.qas {
                out.answers
                    .insert(qa.id.clone(), qa.answers.iter().map(|a| a.text.clone()).collect());
                let gold_chars = qa.answers.first().map(|a| (a.answer_start, a.answer_start + a.text.chars().count()));
                let (inst, alignment) = Instance::new(qa.id.clone(), &qa.question, &para.context, gold_chars);
                match (alignment, gold_chars) {
                    (Alignment::Snapped(_), _) => out.warnings.push(IngestWarning {
                        instance_id: qa.id.clone(),
                        message: "answer offsets snapped outward to token boundaries".into(),
                    }),
                    (Alignment::Unresolved, Some((s, e))) => out.warnings.push(IngestWarning {
                        instance_id: qa.id.clone(),
                        message: format!("answer offsets {s}..{e} do not resolve in a context of {ctx_chars} chars; gold omitted"),
                    }),
                    _ => {}
                }
                out.instances.push(inst);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharSpan {
    pub char_start: usize,
    pub char_end: usize,
}

/// One line of the JSONL corpus cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub id: String,
    pub question: String,
    pub context: String,
    pub gold: Option<CharSpan>,
}

impl CacheRecord {
    pub fn from_instance(inst: &Instance) -> Self {
        CacheRecord {
            id: inst.id.clone(),
            question: inst.question.text().to_string(),
            context: inst.context.text().to_string(),
            gold: inst.gold_chars().map(|(s, e)| CharSpan { char_start: s, char_end: e }),
        }
    }

    pub fn into_instance(self) -> Instance {
        let gold = self.gold.map(|g| (g.char_start, g.char_end));
        Instance::new(self.id, &self.question, &self.context, gold).0
    }
}

pub fn parse_jsonl_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: CacheRecord = serde_json::from_str(line).map_err(|e| CorpusError::Jsonl {
            path: None,
            line: i + 1,
            message: e.to_string(),
        })?;
        let id = rec.id.clone();
        if !corpus.push(rec.into_instance()) {
            return Err(CorpusError::DuplicateId(id));
        }
    }
    Ok(corpus)
}

pub fn load_jsonl_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_jsonl_corpus(&text).map_err(|e| e.with_path(path))
}

pub fn write_jsonl_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let mut buf = Vec::new();
    for inst in corpus.iter() {
        serde_json::to_writer(&mut buf, &CacheRecord::from_instance(inst)).expect("cache record serializes");
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    f.write_all(&buf).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

/// Loads either format: `.jsonl` as the cache, anything else as SQuAD JSON.
pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    if path.extension().map_or(false, |e| e == "jsonl") {
        load_jsonl_corpus(path)
    } else {
        let load = load_squad(path)?;
        for w in &load.warnings {
            log::warn!("{}: {}", w.instance_id, w.message);
        }
        Ok(load.into_corpus())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squad(context: &str, answer: &str, start: usize) -> String {
        serde_json::json!({
            "version": "1.1",
            "data": [{"title": "t", "paragraphs": [{"context": context, "qas": [
                {"id": "q1", "question": "When did it begin?", "answers": [{"text": answer, "answer_start": start}]}
            ]}]}]
        })
        .to_string()
    }

    #[test]
    fn exact_gold() {
        let ctx = "The festival has been held annually since 1995.";
        let load = parse_squad(squad(ctx, "1995", 42).as_bytes()).unwrap();
        assert_eq!(load.instances.len(), 1);
        let inst = &load.instances[0];
        assert_eq!(inst.gold_text(), Some("1995"));
        assert!(!inst.gold_snapped);
        assert!(load.warnings.is_empty());
    }

    #[test]
    fn mid_token_gold_is_snapped_and_flagged() {
        let ctx = "The festival has been held annually since 1995.";
        let load = parse_squad(squad(ctx, "99", 44).as_bytes()).unwrap();
        let inst = &load.instances[0];
        assert_eq!(inst.gold_text(), Some("1995"));
        assert!(inst.gold_snapped);
        assert_eq!(load.warnings.len(), 1);
    }

    #[test]
    fn unresolvable_offset_drops_gold() {
        let load = parse_squad(squad("short", "zzz", 400).as_bytes()).unwrap();
        assert_eq!(load.instances[0].gold, None);
        assert_eq!(load.warnings.len(), 1);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_squad(b"{\"data\": [ {\"paragraphs\": 3 ]}").unwrap_err();
        match err {
            CorpusError::Json { line, column, .. } => assert!(line >= 1 && column > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cache_round_trip() {
        let ctx = "The festival has been held annually since 1995.";
        let corpus = parse_squad(squad(ctx, "1995", 42).as_bytes()).unwrap().into_corpus();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        write_jsonl_corpus(&corpus, &path).unwrap();
        let back = load_jsonl_corpus(&path).unwrap();
        assert_eq!(back.instances()[0].as_ref(), corpus.instances()[0].as_ref());
    }
}
