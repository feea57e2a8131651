use serde::{Deserialize, Serialize};
use std::fmt;

use super::token::TokenSeq;
use super::CorpusError;

/// Inclusive token range `[start, end]` inside some [`TokenSeq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// # Panics
    /// Panics if `start > end`.
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "span start {start} after end {end}");
        Span { start, end }
    }

    pub fn single(i: usize) -> Self {
        Span { start: i, end: i }
    }

    /// Checked constructor against a sequence length.
    pub fn within(start: usize, end: usize, len: usize) -> Result<Self, CorpusError> {
        if start <= end && end < len {
            Ok(Span { start, end })
        } else {
            Err(CorpusError::SpanOutOfRange { start, end, len })
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn shifted(&self, k: usize) -> Span {
        Span { start: self.start + k, end: self.end + k }
    }

    pub fn is_valid_in(&self, seq: &TokenSeq) -> bool {
        self.start <= self.end && self.end < seq.len()
    }

    /// Character offsets `[start, end)` of the span in the source text.
    pub fn char_range(&self, seq: &TokenSeq) -> (usize, usize) {
        let toks = seq.tokens();
        (toks[self.start].char_start, toks[self.end].char_end)
    }

    /// The original substring, including inner whitespace and punctuation.
    pub fn text<'a>(&self, seq: &'a TokenSeq) -> &'a str {
        let (s, e) = self.char_range(seq);
        seq.slice_chars(s, e)
    }

    pub fn lowers<'a>(&self, seq: &'a TokenSeq) -> Vec<&'a str> {
        seq.tokens()[self.start..=self.end].iter().map(|t| t.lower.as_str()).collect()
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// Number of tokens strictly between `a` and `b`, where `a` lies entirely
/// before `b`. Adjacent spans have gap 0; punctuation tokens count.
pub fn gap(a: Span, b: Span) -> Result<usize, CorpusError> {
    if a.end < b.start {
        Ok(b.start - a.end - 1)
    } else {
        Err(CorpusError::Ordering { left: a, right: b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    #[test]
    fn gap_examples() {
        // Her [funeral] was [held]
        assert_eq!(gap(Span::single(1), Span::single(3)).unwrap(), 1);
        // [Brazelton] was eventually tracked down and [killed]
        let seq = tokenize("Brazelton was eventually tracked down and killed");
        assert_eq!(seq.len(), 7);
        assert_eq!(gap(Span::single(0), Span::single(6)).unwrap(), 5);
        assert_eq!(gap(Span::single(2), Span::single(3)).unwrap(), 0);
    }

    #[test]
    fn gap_rejects_overlap_and_order() {
        assert!(gap(Span::new(1, 3), Span::new(3, 4)).is_err());
        assert!(gap(Span::single(5), Span::single(2)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let seq = tokenize("Her funeral was held on Saturday, 2 February, in St George's Chapel");
        let span = Span::new(5, 8);
        assert_eq!(span.text(&seq), "Saturday, 2 February");
        assert_eq!(span.char_range(&seq), (24, 44));
    }
}
