//! Locating a phrase in a sentence.

use super::backend::{to_unit, SimilarityBackend};
use super::fill::ScoredSpan;
use crate::corpus::{enumerate_in, Span, TokenSeq, DEFAULT_MAX_LEN};

/// Light suffix stripping used by the optional stem-match mode.
pub fn stem(word: &str) -> &str {
    for suf in ["ing", "ed", "es", "ly", "s"] {
        if let Some(base) = word.strip_suffix(suf) {
            if base.chars().count() >= 3 {
                // "rebelled" -> "rebel"
                let b = base.as_bytes();
                let n = b.len();
                if matches!(suf, "ing" | "ed") && n >= 2 && b[n - 1] == b[n - 2] && b[n - 1].is_ascii_alphabetic() && !b"aeiou".contains(&b[n - 1]) {
                    return &base[..n - 1];
                }
                return base;
            }
        }
    }
    word
}

/// Case-folded occurrences of `key` (lowercased tokens) in `s[lo..hi)`.
pub fn find_strict_in(key: &[&str], s: &TokenSeq, lo: usize, hi: usize, use_stem: bool) -> Vec<Span> {
    let toks = s.tokens();
    let hi = hi.min(toks.len());
    let n = key.len();
    if n == 0 || hi < lo + n {
        return Vec::new();
    }
    let eq = |a: &str, b: &str| if use_stem { stem(a) == stem(b) } else { a == b };
    (lo..=hi - n)
        .filter(|&i| key.iter().zip(&toks[i..i + n]).all(|(k, t)| eq(k, &t.lower)))
        .map(|i| Span::new(i, i + n - 1))
        .collect()
}

pub fn find_strict(key: &[&str], s: &TokenSeq) -> Vec<Span> {
    find_strict_in(key, s, 0, s.len(), false)
}

/// Candidates of `s[lo..hi)` ranked by similarity to `p_ref` in `q_ref`.
pub fn find_soft_in(q_ref: &TokenSeq, p_ref: Span, s: &TokenSeq, lo: usize, hi: usize, backend: &dyn SimilarityBackend) -> Vec<ScoredSpan> {
    let anchor = backend.embed(q_ref, p_ref);
    let max_len = DEFAULT_MAX_LEN.max(p_ref.len());
    let mut out: Vec<ScoredSpan> = enumerate_in(s, lo, hi, max_len)
        .into_iter()
        .map(|c| ScoredSpan { span: c, score: to_unit(backend.similarity(&anchor, &backend.embed(s, c))) })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.span.cmp(&b.span)));
    out
}

pub fn find_soft(q_ref: &TokenSeq, p_ref: Span, s: &TokenSeq, backend: &dyn SimilarityBackend) -> Vec<ScoredSpan> {
    find_soft_in(q_ref, p_ref, s, 0, s.len(), backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::backend::{ExactMatch, Lexical};
    use crate::corpus::tokenize;

    #[test]
    fn strict_examples() {
        let s = tokenize("Her funeral was held on Saturday");
        assert_eq!(find_strict(&["funeral"], &s), vec![Span::single(1)]);
        let s = tokenize("In 1973 , Independence was declared on 24 September 1973 .");
        assert_eq!(find_strict(&["independence"], &s), vec![Span::single(3)]);
        assert!(find_strict(&["treaty"], &s).is_empty());
        assert_eq!(find_strict(&["1973"], &s).len(), 2);
    }

    #[test]
    fn stem_mode() {
        let s = tokenize("the rebels rebelled");
        assert!(find_strict(&["rebel"], &s).is_empty());
        assert_eq!(find_strict_in(&["rebel"], &s, 0, s.len(), true).len(), 2);
    }

    #[test]
    fn soft_find_promoter() {
        let q = tokenize("How is a promoter sequence recognized?");
        let s = tokenize("The promoter is recognized and bound by the polymerase.");
        let ranked = find_soft(&q, Span::new(2, 4), &s, &Lexical::plain());
        assert_eq!(ranked[0].span.text(&s), "promoter");
        assert!(ranked.iter().all(|c| (0.0..=1.0).contains(&c.score)));
        assert!(find_soft(&q, Span::new(2, 4), &tokenize(""), &Lexical::plain()).is_empty());
    }

    #[test]
    fn verbatim_occurrence_is_maximal() {
        let q = tokenize("When was Queen Victoria's funeral held?");
        let s = tokenize("Her funeral was held on Saturday");
        let ranked = find_soft(&q, Span::single(5), &s, &ExactMatch::default());
        assert_eq!(ranked[0], ScoredSpan { span: Span::single(1), score: 1.0 });
        let strict = find_strict(&["funeral"], &s);
        assert!(strict.iter().all(|sp| ranked.iter().take(strict.len()).any(|c| c.span == *sp)));
    }
}
