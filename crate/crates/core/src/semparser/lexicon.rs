use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::category::Category;
use super::lambda::{parse_template, Term};

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.json");

/// Surface wildcard matching any numeric token.
pub const NUM_WILDCARD: &str = "<num>";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SurfaceToken {
    Word(String),
    Number,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconRecord {
    pub surface: String,
    pub category: String,
    pub semantics: String,
    #[serde(default)]
    pub priority: i32,
}

#[derive(Debug, Clone)]
pub struct LexiconEntry {
    pub surface: Vec<SurfaceToken>,
    pub category: Category,
    pub semantics: Term,
    pub priority: i32,
    pub record: LexiconRecord,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon is not valid JSON (line {line}, column {column}): {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("lexicon entry at line {line}: {message}")]
    Entry { line: usize, message: String },
}

/// Entries indexed by their first surface token.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    index: BTreeMap<String, Vec<usize>>,
}

fn surface_key(tok: &SurfaceToken) -> &str {
    match tok {
        SurfaceToken::Word(w) => w,
        SurfaceToken::Number => NUM_WILDCARD,
    }
}

/// Line numbers of the objects in a top-level JSON array.
fn element_lines(text: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut in_str = false;
    let mut escaped = false;
    let mut line = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
        }
        if in_str {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '[' | '{' => {
                if depth == 1 {
                    out.push(line);
                }
                depth += 1;
            }
            ']' | '}' => depth -= 1,
            _ => {}
        }
    }
    out
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Lexicon {
        Lexicon::from_json(DEFAULT_LEXICON).expect("shipped lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Lexicon, LexiconError> {
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })?;
        Lexicon::from_json(&text)
    }

    /// An empty or whitespace-only document is an empty lexicon.
    pub fn from_json(text: &str) -> Result<Lexicon, LexiconError> {
        if text.trim().is_empty() {
            return Ok(Lexicon::default());
        }
        let records: Vec<LexiconRecord> = serde_json::from_str(text).map_err(|e| LexiconError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let lines = element_lines(text);
        let mut lex = Lexicon::default();
        let mut seen = HashSet::new();
        for (i, rec) in records.into_iter().enumerate() {
            let line = lines.get(i).copied().unwrap_or(0);
            let entry = Lexicon::compile_record(rec).map_err(|message| LexiconError::Entry { line, message })?;
            if !seen.insert((entry.surface.clone(), entry.category.clone())) {
                return Err(LexiconError::Entry {
                    line,
                    message: format!("duplicate entry for {:?} with category {}", entry.record.surface, entry.category),
                });
            }
            lex.push(entry);
        }
        Ok(lex)
    }

    fn compile_record(rec: LexiconRecord) -> Result<LexiconEntry, String> {
        let surface: Vec<SurfaceToken> = rec
            .surface
            .split_whitespace()
            .map(|w| if w == NUM_WILDCARD { SurfaceToken::Number } else { SurfaceToken::Word(w.to_lowercase()) })
            .collect();
        if surface.is_empty() {
            return Err("empty surface".into());
        }
        let category: Category = rec.category.parse().map_err(|e| format!("{e}"))?;
        let semantics = parse_template(&rec.semantics).map_err(|e| format!("semantics {:?}: {e}", rec.semantics))?;
        if let Some(v) = semantics.free_vars().first() {
            return Err(format!("semantics has free variable {v:?}"));
        }
        let wildcards = surface.iter().filter(|s| **s == SurfaceToken::Number).count();
        if wildcards > 1 {
            return Err("at most one numeric wildcard per surface".into());
        }
        if semantics.has_num_slot() && wildcards == 0 {
            return Err("$0 used without a numeric wildcard in the surface".into());
        }
        let (lams, body) = semantics.leading_lambdas();
        let arity = category.arity();
        let eta_reduced = lams < arity && matches!(body, Term::Var(_));
        if lams != arity && !eta_reduced {
            return Err(format!("semantics takes {lams} arguments but category {category} takes {arity}"));
        }
        Ok(LexiconEntry { surface, category, semantics, priority: rec.priority, record: rec })
    }

    pub fn push(&mut self, entry: LexiconEntry) {
        let key = surface_key(&entry.surface[0]).to_string();
        self.index.entry(key).or_default().push(self.entries.len());
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose surface starts with `key` (a lowercased word or
    /// [`NUM_WILDCARD`]).
    pub fn starting_with(&self, key: &str) -> impl Iterator<Item = &LexiconEntry> {
        self.index.get(key).into_iter().flatten().map(|&i| &self.entries[i])
    }

    pub fn records(&self) -> Vec<LexiconRecord> {
        self.entries.iter().map(|e| e.record.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_indexes() {
        let lex = Lexicon::from_json(
            r#"[
  {"surface": "directly after", "category": "NP/NP", "semantics": "λx.@Direct(@Right(x))"}
]"#,
        )
        .unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.starting_with("directly").count(), 1);
        assert_eq!(lex.starting_with("after").count(), 0);
    }

    #[test]
    fn empty_file_is_empty_lexicon() {
        assert!(Lexicon::from_json("").unwrap().is_empty());
        assert!(Lexicon::from_json("[]").unwrap().is_empty());
    }

    #[test]
    fn malformed_category_names_line() {
        let text = "[\n  {\"surface\": \"a\", \"category\": \"NP/N\", \"semantics\": \"λx.x\"},\n  {\"surface\": \"b\", \"category\": \"(S\\\\NP\", \"semantics\": \"λx.x\"}\n]";
        match Lexicon::from_json(text).unwrap_err() {
            LexiconError::Entry { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("category"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_arity_mismatch() {
        let dup = r#"[{"surface": "a", "category": "NP/N", "semantics": "λx.x"},
                      {"surface": "a", "category": "NP/N", "semantics": "λy.y"}]"#;
        assert!(matches!(Lexicon::from_json(dup), Err(LexiconError::Entry { line: 2, .. })));
        let arity = r#"[{"surface": "is", "category": "(S\\NP)/PP", "semantics": "λp.@Direct(p)"}]"#;
        assert!(Lexicon::from_json(arity).is_err());
    }

    #[test]
    fn builtin_lexicon_loads() {
        let lex = Lexicon::builtin();
        assert!(lex.starting_with("directly").count() >= 2);
        assert!(lex.starting_with(NUM_WILDCARD).count() >= 1);
    }
}
