//! Small bundled corpus and explanations used by tests, demos and the
//! service's default data.

use crate::corpus::{parse_jsonl_corpus, Corpus};
use crate::semparser::ExplanationRecord;
use crate::teacher::parse_explanation_records;

pub const INSTANCES_JSONL: &str = include_str!("../data/fixtures/instances.jsonl");
pub const EXPLANATIONS_JSONL: &str = include_str!("../data/fixtures/explanations.jsonl");

pub fn corpus() -> Corpus {
    parse_jsonl_corpus(INSTANCES_JSONL).expect("bundled instances parse")
}

pub fn explanations() -> Vec<ExplanationRecord> {
    parse_explanation_records(EXPLANATIONS_JSONL).expect("bundled explanations parse")
}

pub fn explanation(id: &str) -> ExplanationRecord {
    explanations().into_iter().find(|e| e.id == id).unwrap_or_else(|| panic!("no bundled explanation {id}"))
}
