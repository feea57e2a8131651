//! Proposing spans that play the same role as a reference span.

use serde::{Deserialize, Serialize};

use super::backend::{to_unit, SimilarityBackend};
use crate::corpus::{classify_answer_type, enumerate_in, matches_np, np_chunks_in, AnswerType, Pos, Span, TokenSeq, DEFAULT_MAX_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSpan {
    pub span: Span,
    pub score: f64,
}

/// How a candidate structurally resembles the reference span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchKind {
    AnswerType,
    NounPhrase,
    PosExact,
}

impl MatchKind {
    /// Prior used only to order otherwise equal candidates.
    pub fn strength(self) -> f64 {
        match self {
            MatchKind::PosExact => 1.0,
            MatchKind::NounPhrase => 0.75,
            MatchKind::AnswerType => 0.5,
        }
    }
}

fn pos_class(p: Pos) -> Pos {
    if p == Pos::Propn {
        Pos::Noun
    } else {
        p
    }
}

fn tagged<'a>(seq: &'a TokenSeq, span: Span) -> Vec<(Pos, &'a str)> {
    seq.tokens()[span.start..=span.end].iter().map(|t| (t.pos, t.lower.as_str())).collect()
}

/// Every span that may fill a slot in `s[lo..hi)`: the boundary-filtered
/// enumeration plus noun-phrase chunks, sorted and deduplicated.
pub fn fill_candidates(s: &TokenSeq, lo: usize, hi: usize, max_len: usize) -> Vec<Span> {
    let mut c = enumerate_in(s, lo, hi, max_len);
    c.extend(np_chunks_in(s, lo, hi, max_len));
    c.sort();
    c.dedup();
    c
}

/// Strongest structural match of `cand` in `s` against `p_ref` in `s_ref`.
pub fn match_kind(s_ref: &TokenSeq, p_ref: Span, s: &TokenSeq, cand: Span) -> Option<MatchKind> {
    let r = tagged(s_ref, p_ref);
    let c = tagged(s, cand);
    if r.len() == c.len() && r.iter().zip(&c).all(|(a, b)| pos_class(a.0) == pos_class(b.0)) {
        return Some(MatchKind::PosExact);
    }
    if matches_np(&r) && matches_np(&c) {
        return Some(MatchKind::NounPhrase);
    }
    let rt = classify_answer_type(s_ref, p_ref);
    let ct = classify_answer_type(s, cand);
    if rt.iter().any(|t| *t != AnswerType::Other && ct.contains(t)) {
        return Some(MatchKind::AnswerType);
    }
    None
}

/// Strict matches within `s[lo..hi)` with how they matched.
pub fn fill_strict_in(s_ref: &TokenSeq, p_ref: Span, s: &TokenSeq, lo: usize, hi: usize, max_len: usize) -> Vec<(Span, MatchKind)> {
    fill_candidates(s, lo, hi, max_len)
        .into_iter()
        .filter_map(|c| match_kind(s_ref, p_ref, s, c).map(|k| (c, k)))
        .collect()
}

pub fn fill_strict(s_ref: &TokenSeq, p_ref: Span, s: &TokenSeq) -> Vec<Span> {
    let max_len = DEFAULT_MAX_LEN.max(p_ref.len());
    fill_strict_in(s_ref, p_ref, s, 0, s.len(), max_len).into_iter().map(|(c, _)| c).collect()
}

/// Top `k` candidates of `s[lo..hi)` by similarity to the reference span.
/// Ties keep span order.
pub fn fill_soft_in(
    s_ref: &TokenSeq,
    p_ref: Span,
    s: &TokenSeq,
    lo: usize,
    hi: usize,
    max_len: usize,
    backend: &dyn SimilarityBackend,
    k: usize,
) -> Vec<ScoredSpan> {
    let anchor = backend.embed(s_ref, p_ref);
    let mut scored: Vec<ScoredSpan> = fill_candidates(s, lo, hi, max_len)
        .into_iter()
        .map(|c| ScoredSpan { span: c, score: to_unit(backend.similarity(&anchor, &backend.embed(s, c))) })
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.span.cmp(&b.span)));
    scored.truncate(k);
    scored
}

pub fn fill_soft(s_ref: &TokenSeq, p_ref: Span, s: &TokenSeq, backend: &dyn SimilarityBackend, k: usize) -> Vec<ScoredSpan> {
    let max_len = DEFAULT_MAX_LEN.max(p_ref.len());
    fill_soft_in(s_ref, p_ref, s, 0, s.len(), max_len, backend, k)
}
