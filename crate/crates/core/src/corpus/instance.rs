use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use super::span::Span;
use super::token::{tokenize, TokenSeq};

/// One (question, context, optional gold answer) record.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub question: TokenSeq,
    pub context: TokenSeq,
    pub gold: Option<Span>,
    /// Gold offsets did not fall on token boundaries and were widened.
    pub gold_snapped: bool,
    sentences: Vec<Range<usize>>,
}

/// Outcome of mapping character offsets onto tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    Exact(Span),
    Snapped(Span),
    Unresolved,
}

impl Instance {
    /// Builds an instance; `gold_chars` are character offsets into `context`.
    pub fn new(id: impl Into<String>, question: &str, context: &str, gold_chars: Option<(usize, usize)>) -> (Self, Alignment) {
        let question = tokenize(question);
        let context = tokenize(context);
        let alignment = match gold_chars {
            Some((s, e)) => align_chars(&context, s, e),
            None => Alignment::Unresolved,
        };
        let (gold, gold_snapped) = match alignment {
            Alignment::Exact(sp) => (Some(sp), false),
            Alignment::Snapped(sp) => (Some(sp), true),
            Alignment::Unresolved => (None, false),
        };
        let sentences = split_sentences(&context);
        (
            Instance {
                id: id.into(),
                question,
                context,
                gold,
                gold_snapped,
                sentences,
            },
            alignment,
        )
    }

    /// Convenience for fixtures: gold given as the first occurrence of a substring.
    pub fn with_answer_text(id: impl Into<String>, question: &str, context: &str, answer: Option<&str>) -> Self {
        let gold = answer.and_then(|a| {
            let byte = context.find(a)?;
            let start = context[..byte].chars().count();
            Some((start, start + a.chars().count()))
        });
        Instance::new(id, question, context, gold).0
    }

    /// Context sentences as half-open token ranges.
    pub fn sentences(&self) -> &[Range<usize>] {
        &self.sentences
    }

    pub fn sentence_containing(&self, tok: usize) -> Option<Range<usize>> {
        self.sentences.iter().find(|r| r.contains(&tok)).cloned()
    }

    pub fn gold_text(&self) -> Option<&str> {
        self.gold.map(|g| g.text(&self.context))
    }

    pub fn gold_chars(&self) -> Option<(usize, usize)> {
        self.gold.map(|g| g.char_range(&self.context))
    }
}

/// Maps `[start, end)` character offsets onto the covering token span.
pub fn align_chars(seq: &TokenSeq, start: usize, end: usize) -> Alignment {
    if start >= end {
        return Alignment::Unresolved;
    }
    let toks = seq.tokens();
    let first = toks.iter().position(|t| t.char_end > start);
    let last = toks.iter().rposition(|t| t.char_start < end);
    match (first, last) {
        (Some(f), Some(l)) if f <= l => {
            let span = Span { start: f, end: l };
            if toks[f].char_start == start && toks[l].char_end == end {
                Alignment::Exact(span)
            } else {
                Alignment::Snapped(span)
            }
        }
        _ => Alignment::Unresolved,
    }
}

const ABBREVIATIONS: &[&str] = &[
    "st", "mr", "mrs", "ms", "dr", "jr", "sr", "prof", "gen", "col", "lt", "mt", "ft", "vs",
    "etc", "no", "inc", "co", "corp", "approx", "u.s", "e.g", "i.e", "sgt", "capt", "rev",
];

/// Splits on `.`, `!`, `?` unless the period follows a known abbreviation
/// or a single capital letter, or the next token starts lowercase.
pub fn split_sentences(seq: &TokenSeq) -> Vec<Range<usize>> {
    let toks = seq.tokens();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..toks.len() {
        let t = &toks[i];
        if !matches!(t.text.as_str(), "." | "!" | "?") {
            continue;
        }
        let next = toks.get(i + 1);
        let Some(next) = next else { continue };
        if t.text == "." && i > 0 {
            let prev = &toks[i - 1];
            let abbrev = ABBREVIATIONS.contains(&prev.lower.as_str())
                || (prev.text.chars().count() == 1 && prev.text.chars().all(char::is_uppercase));
            // Attached period only: "St." not "end ."
            if abbrev && prev.char_end == t.char_start {
                continue;
            }
        }
        let starts_upper = next.text.chars().next().map_or(false, |c| c.is_uppercase() || c.is_ascii_digit() || !c.is_alphanumeric());
        if !starts_upper {
            continue;
        }
        out.push(start..i + 1);
        start = i + 1;
    }
    if start < toks.len() {
        out.push(start..toks.len());
    }
    out
}

/// Instances indexed by id, in load order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    instances: Vec<Arc<Instance>>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    /// Later duplicates of an id are dropped.
    pub fn push(&mut self, inst: Instance) -> bool {
        if self.by_id.contains_key(&inst.id) {
            return false;
        }
        self.by_id.insert(inst.id.clone(), self.instances.len());
        self.instances.push(Arc::new(inst));
        true
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Instance>> {
        self.by_id.get(id).map(|&i| &self.instances[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Instance>> {
        self.instances.iter()
    }

    pub fn instances(&self) -> &[Arc<Instance>] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

impl FromIterator<Instance> for Corpus {
    fn from_iter<T: IntoIterator<Item = Instance>>(iter: T) -> Self {
        let mut c = Corpus::new();
        for inst in iter {
            c.push(inst);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_snapped_alignment() {
        let seq = tokenize("The festival has been held annually since 1995.");
        let start = "The festival has been held annually since ".chars().count();
        assert_eq!(align_chars(&seq, start, start + 4), Alignment::Exact(Span::single(7)));
        assert_eq!(align_chars(&seq, start + 1, start + 3), Alignment::Snapped(Span::single(7)));
        assert_eq!(align_chars(&seq, 200, 210), Alignment::Unresolved);
    }

    #[test]
    fn sentence_split_respects_abbreviations() {
        let seq = tokenize("In 1343, the people rebelled in the St. George's Night Uprising. It failed. ok.");
        let sents = split_sentences(&seq);
        assert_eq!(sents.len(), 2);
        let first_end = sents[0].end;
        assert_eq!(seq.tokens()[first_end - 1].text, ".");
        assert_eq!(seq.tokens()[first_end].text, "It");
    }

    #[test]
    fn fixture_gold_by_text() {
        let inst = Instance::with_answer_text("q1", "When?", "Her funeral was held on Saturday, 2 February, in St George's Chapel.", Some("Saturday, 2 February"));
        assert_eq!(inst.gold_text(), Some("Saturday, 2 February"));
        assert!(!inst.gold_snapped);
    }
}
