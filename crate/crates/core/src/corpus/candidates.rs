use super::span::Span;
use super::token::{Pos, TokenSeq};

pub const DEFAULT_MAX_LEN: usize = 10;

fn is_boundary_ok(pos: Pos) -> bool {
    !matches!(pos, Pos::Punct | Pos::Det)
}

/// All spans of up to `max_len` tokens that neither start nor end on a
/// punctuation or determiner token, ordered by start then end.
pub fn enumerate_candidates(seq: &TokenSeq, max_len: usize) -> Vec<Span> {
    enumerate_in(seq, 0, seq.len(), max_len)
}

/// Same as [`enumerate_candidates`] restricted to tokens `[lo, hi)`.
pub fn enumerate_in(seq: &TokenSeq, lo: usize, hi: usize, max_len: usize) -> Vec<Span> {
    let toks = seq.tokens();
    let hi = hi.min(toks.len());
    let mut out = Vec::new();
    for start in lo..hi {
        if !is_boundary_ok(toks[start].pos) {
            continue;
        }
        let last = (start + max_len).min(hi);
        for end in start..last {
            if is_boundary_ok(toks[end].pos) {
                out.push(Span { start, end });
            }
        }
    }
    out
}

fn np_body(pos: Pos, lower: &str) -> bool {
    matches!(pos, Pos::Noun | Pos::Propn | Pos::Adj | Pos::Num) || is_gerund(pos, lower)
}

fn is_gerund(pos: Pos, lower: &str) -> bool {
    pos == Pos::Verb && lower.ends_with("ing")
}

/// Noun-phrase chunks `DET? (ADJ|NOUN|PROPN|NUM)+ ("of" DET? (ADJ|NOUN|PROPN|NUM)+)*`
/// ending on a nominal or numeric token (an "-ing" verb counts as nominal), in `[lo, hi)`. Unlike
/// [`enumerate_in`] these may open with a determiner. Every contiguous
/// sub-chunk that still matches the pattern is returned.
pub fn np_chunks_in(seq: &TokenSeq, lo: usize, hi: usize, max_len: usize) -> Vec<Span> {
    let toks = seq.tokens();
    let hi = hi.min(toks.len());
    let mut out = Vec::new();
    for start in lo..hi {
        for end in start..(start + max_len).min(hi) {
            if matches_np(&toks[start..=end].iter().map(|t| (t.pos, t.lower.as_str())).collect::<Vec<_>>()) {
                out.push(Span { start, end });
            }
        }
    }
    out
}

/// Whether a tag/word sequence has noun-phrase shape.
pub fn matches_np(items: &[(Pos, &str)]) -> bool {
    let mut i = 0;
    let n = items.len();
    loop {
        if i < n && items[i].0 == Pos::Det {
            i += 1;
        }
        let body_start = i;
        while i < n && np_body(items[i].0, items[i].1) {
            i += 1;
        }
        if i == body_start {
            return false;
        }
        let (last_pos, last_word) = items[i - 1];
        if !(matches!(last_pos, Pos::Noun | Pos::Propn | Pos::Num) || is_gerund(last_pos, last_word)) {
            return false;
        }
        if i == n {
            return true;
        }
        if items[i].1 == "of" && i + 1 < n {
            i += 1;
            continue;
        }
        return false;
    }
}
