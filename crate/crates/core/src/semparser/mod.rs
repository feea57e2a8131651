//! Lexicon-driven categorial parsing of explanation sentences.

mod category;
mod chart;
mod explanation;
mod lambda;
mod lexicon;
mod logical_form;

pub use category::{Category, CategoryError, Prim};
pub use chart::{parse_tokens, Parse, MAX_SKIPS};
pub use explanation::{
    extract_variables, flatten_rules, parse_explanation, parse_sentences, segment, tokenize_sentence, Diagnostics,
    ExplToken, Explanation, ExplanationIssue, ExplanationRecord, SentenceParse,
};
pub use lambda::{parse_template, Term};
pub use lexicon::{Lexicon, LexiconEntry, LexiconError, LexiconRecord, SurfaceToken, NUM_WILDCARD};
pub use logical_form::{is_variable_name, LfSyntaxError, LogicalForm, Predicate, Sort, SortError, VARIABLE_NAMES};

/// Parses one sentence of raw text.
pub fn parse_sentence(sentence: &str, lexicon: &Lexicon) -> Vec<Parse> {
    parse_tokens(&tokenize_sentence(sentence), lexicon)
}
