//! Tokenized questions and contexts, spans, answer types and corpus I/O.

mod answer_type;
mod candidates;
mod instance;
mod span;
mod squad;
mod token;

use std::path::{Path, PathBuf};

pub use answer_type::{classify_answer_type, is_month, is_weekday, AnswerType};
pub use candidates::{enumerate_candidates, enumerate_in, matches_np, np_chunks_in, DEFAULT_MAX_LEN};
pub use instance::{align_chars, split_sentences, Alignment, Corpus, Instance};
pub use span::{gap, Span};
pub use squad::{
    load_corpus, load_jsonl_corpus, load_squad, parse_jsonl_corpus, parse_squad, write_jsonl_corpus,
    CacheRecord, CharSpan, IngestWarning, SquadLoad,
};
pub use token::{is_numeric_token, number_value, shape_of, tag, tokenize, Pos, Token, TokenSeq};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}malformed JSON at line {line}, column {column}: {message}", path_prefix(.path))]
    Json {
        path: Option<PathBuf>,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}bad record on line {line}: {message}", path_prefix(.path))]
    Jsonl {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },
    #[error("duplicate instance id {0:?}")]
    DuplicateId(String),
    #[error("span [{start},{end}] out of range for {len} tokens")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
    #[error("span {left} does not precede span {right}")]
    Ordering { left: Span, right: Span },
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default()
}

impl CorpusError {
    pub(crate) fn with_path(self, p: &Path) -> Self {
        match self {
            CorpusError::Json { line, column, message, .. } => CorpusError::Json { path: Some(p.to_path_buf()), line, column, message },
            CorpusError::Jsonl { line, message, .. } => CorpusError::Jsonl { path: Some(p.to_path_buf()), line, message },
            other => other,
        }
    }
}
