//! Explanation text: sentence segmentation, variable definitions and
//! per-sentence parsing.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::chart::{parse_tokens, Parse};
use super::lexicon::Lexicon;
use super::logical_form::{is_variable_name, LogicalForm, Predicate};
use crate::corpus::number_value;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExplToken {
    Word(String),
    Number(i64),
    Quoted(String),
    Var(String),
}

impl fmt::Display for ExplToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExplToken::Word(w) => f.write_str(w),
            ExplToken::Number(n) => write!(f, "{n}"),
            ExplToken::Quoted(q) => write!(f, "\"{q}\""),
            ExplToken::Var(v) => f.write_str(v),
        }
    }
}

/// Closing quote for an opening quote at `chars[i..]`, with the opener's width.
fn quote_at(chars: &[char], i: usize) -> Option<(&'static str, usize)> {
    match chars[i] {
        '"' => Some(("\"", 1)),
        '\u{201C}' => Some(("\u{201D}", 1)),
        '`' if chars.get(i + 1) == Some(&'`') => Some(("''", 2)),
        _ => None,
    }
}

/// Index just past the closing quote, or `None` if the quote never closes.
fn find_close(chars: &[char], from: usize, close: &str) -> Option<(usize, usize)> {
    let close: Vec<char> = close.chars().collect();
    let mut j = from;
    while j + close.len() <= chars.len() {
        if chars[j..j + close.len()] == close[..] {
            return Some((j, j + close.len()));
        }
        j += 1;
    }
    None
}

/// Splits raw explanation text into sentences. Boundaries are `.`, `!`
/// and `?` outside quotes when followed by whitespace or the end, plus a
/// clause break before ", so".
pub fn segment(raw: &str) -> Vec<String> {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut i = 0;
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        let s = cur.trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
        cur.clear();
    };
    while i < chars.len() {
        if let Some((close, w)) = quote_at(&chars, i) {
            if let Some((_, end)) = find_close(&chars, i + w, close) {
                cur.extend(&chars[i..end]);
                i = end;
                continue;
            }
        }
        let c = chars[i];
        if matches!(c, '.' | '!' | '?') && chars.get(i + 1).map_or(true, |n| n.is_whitespace()) {
            flush(&mut cur, &mut out);
            i += 1;
            continue;
        }
        if c == ',' {
            let rest: String = chars[i + 1..].iter().take(4).collect();
            let lower = rest.to_lowercase();
            if lower.starts_with(" so ") {
                flush(&mut cur, &mut out);
                i += 1;
                continue;
            }
        }
        cur.push(c);
        i += 1;
    }
    flush(&mut cur, &mut out);
    out
}

/// Tokens of one sentence: lowercased words, numbers, quoted phrases and
/// variable names. Other punctuation is dropped.
pub fn tokenize_sentence(s: &str) -> Vec<ExplToken> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if let Some((close, w)) = quote_at(&chars, i) {
            if let Some((inner_end, end)) = find_close(&chars, i + w, close) {
                let inner: String = chars[i + w..inner_end].iter().collect();
                out.push(ExplToken::Quoted(inner.split_whitespace().collect::<Vec<_>>().join(" ")));
                i = end;
                continue;
            }
        }
        let c = chars[i];
        if c.is_alphanumeric() {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric()
                    || (matches!(chars[i], '\'' | '-' | '\u{2019}') && chars.get(i + 1).map_or(false, |n| n.is_alphanumeric())))
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if is_variable_name(&word) {
                out.push(ExplToken::Var(word));
            } else {
                let lower = word.to_lowercase();
                match number_value(&lower) {
                    Some(v) if v >= 0 => out.push(ExplToken::Number(v)),
                    _ => out.push(ExplToken::Word(lower)),
                }
            }
            continue;
        }
        i += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub id: String,
    pub instance_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExplanationIssue {
    #[error("variable {name} is defined more than once")]
    DuplicateVariable { name: String },
    #[error("sentence {index} ({sentence:?}) uses undefined variable {name}")]
    UndefinedVariable { index: usize, sentence: String, name: String },
    #[error("sentence {index} could not be parsed: {sentence:?}")]
    Unparsable { index: usize, sentence: String },
    #[error("explanation has no constraints")]
    NoConstraints,
    #[error("no rule constrains the answer")]
    NoAnswerConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
pub struct Diagnostics {
    pub issues: Vec<ExplanationIssue>,
}

/// An explanation split into variable definitions and rule sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub id: String,
    pub instance_id: String,
    pub raw_text: String,
    pub variable_defs: IndexMap<String, String>,
    /// Rule sentences in order, definitions removed.
    pub sentences: Vec<String>,
}

fn as_definition(tokens: &[ExplToken]) -> Option<(String, String)> {
    match tokens {
        [ExplToken::Var(v), ExplToken::Word(is), ExplToken::Quoted(q)] if is == "is" => Some((v.clone(), q.clone())),
        _ => None,
    }
}

/// Collects `X is "..."` definitions.
pub fn extract_variables(raw: &str) -> Result<IndexMap<String, String>, Diagnostics> {
    Explanation::new("", "", raw).map(|e| e.variable_defs)
}

impl Explanation {
    pub fn new(id: impl Into<String>, instance_id: impl Into<String>, raw: &str) -> Result<Self, Diagnostics> {
        let mut defs = IndexMap::new();
        let mut sentences = Vec::new();
        let mut issues = Vec::new();
        for s in segment(raw) {
            match as_definition(&tokenize_sentence(&s)) {
                Some((name, surface)) => {
                    if defs.contains_key(&name) {
                        issues.push(ExplanationIssue::DuplicateVariable { name });
                    } else {
                        defs.insert(name, surface);
                    }
                }
                None => sentences.push(s),
            }
        }
        if !issues.is_empty() {
            return Err(Diagnostics { issues });
        }
        Ok(Explanation { id: id.into(), instance_id: instance_id.into(), raw_text: raw.to_string(), variable_defs: defs, sentences })
    }

    pub fn from_record(rec: &ExplanationRecord) -> Result<Self, Diagnostics> {
        Explanation::new(rec.id.clone(), rec.instance_id.clone(), &rec.text)
    }
}

/// Parse outcome for one rule sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceParse {
    pub text: String,
    pub parses: Vec<Parse>,
}

impl SentenceParse {
    pub fn best(&self) -> Option<&LogicalForm> {
        self.parses.first().map(|p| &p.lf)
    }
}

/// Parses every rule sentence; never fails.
pub fn parse_sentences(expl: &Explanation, lex: &Lexicon) -> Vec<SentenceParse> {
    expl.sentences
        .iter()
        .map(|s| SentenceParse { text: s.clone(), parses: parse_tokens(&tokenize_sentence(s), lex) })
        .collect()
}

/// Splits top-level conjunctions into separate rules.
pub fn flatten_rules(lf: &LogicalForm, out: &mut Vec<LogicalForm>) {
    match lf {
        LogicalForm::Pred(Predicate::And, args) => args.iter().for_each(|a| flatten_rules(a, out)),
        LogicalForm::Pred(Predicate::In, args) if matches!(args[0], LogicalForm::Pred(Predicate::And, _)) => {
            let mut inner = Vec::new();
            flatten_rules(&args[0], &mut inner);
            out.extend(inner.into_iter().map(|r| LogicalForm::Pred(Predicate::In, vec![r, args[1].clone()])));
        }
        other => out.push(other.clone()),
    }
}

/// Top-ranked logical form per rule sentence, with explanation-level checks.
pub fn parse_explanation(expl: &Explanation, lex: &Lexicon) -> Result<Vec<LogicalForm>, Diagnostics> {
    let mut issues = Vec::new();
    if expl.sentences.is_empty() {
        issues.push(ExplanationIssue::NoConstraints);
    }
    let mut forms = Vec::new();
    for (index, sp) in parse_sentences(expl, lex).into_iter().enumerate() {
        match sp.best() {
            None => issues.push(ExplanationIssue::Unparsable { index, sentence: sp.text.clone() }),
            Some(lf) => {
                for name in lf.variables() {
                    if !expl.variable_defs.contains_key(&name) {
                        issues.push(ExplanationIssue::UndefinedVariable { index, sentence: sp.text.clone(), name });
                    }
                }
                forms.push(lf.clone());
            }
        }
    }
    if issues.is_empty() && !forms.iter().any(|f| f.mentions_answer()) {
        issues.push(ExplanationIssue::NoAnswerConstraint);
    }
    if issues.is_empty() {
        Ok(forms)
    } else {
        Err(Diagnostics { issues })
    }
}
