//! Linear start/end span scorer over hand-built token features.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::corpus::{is_month, is_weekday, Instance, Pos, Span};

pub const FEATURE_NAMES: [&str; 27] = [
    "bias",
    "in_question",
    "prev_in_question",
    "next_in_question",
    "question_left3",
    "question_right3",
    "anchor_proximity",
    "pos_num",
    "pos_propn",
    "pos_noun",
    "pos_adj",
    "pos_verb",
    "pos_det",
    "pos_adp",
    "pos_punct",
    "capitalized",
    "year_like",
    "date_word",
    "prev_adp",
    "prev_punct",
    "next_punct",
    "temporal_q_x_date",
    "person_q_x_propn",
    "number_q_x_num",
    "location_q_x_propn",
    "relative_position",
    "best_overlap_sentence",
];

pub const NUM_FEATURES: usize = FEATURE_NAMES.len();

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("{items} items but {weights} weights")]
    LengthMismatch { items: usize, weights: usize },
    #[error("target {span} outside the context of {id}")]
    TargetOutOfRange { id: String, span: Span },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Student {
    pub feature_names: Vec<String>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub max_len: usize,
}

impl Default for Student {
    fn default() -> Self {
        Student::new(crate::corpus::DEFAULT_MAX_LEN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudentGrad {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl StudentGrad {
    pub fn zeros() -> Self {
        StudentGrad { start: vec![0.0; NUM_FEATURES], end: vec![0.0; NUM_FEATURES] }
    }

    pub fn add_scaled(&mut self, other: &StudentGrad, k: f64) {
        for (a, b) in self.start.iter_mut().zip(&other.start) {
            *a += k * b;
        }
        for (a, b) in self.end.iter_mut().zip(&other.end) {
            *a += k * b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum QuestionKind {
    Temporal,
    Person,
    Number,
    Location,
    Other,
}

fn question_kind(inst: &Instance) -> QuestionKind {
    let l = inst.question.lowers();
    let has = |w: &str| l.contains(&w);
    let pair = |a: &str, b: &str| l.windows(2).any(|p| p[0] == a && p[1] == b);
    if has("when") || pair("what", "year") || pair("which", "year") {
        QuestionKind::Temporal
    } else if pair("how", "many") || pair("how", "much") {
        QuestionKind::Number
    } else if has("who") || has("whom") {
        QuestionKind::Person
    } else if has("where") {
        QuestionKind::Location
    } else {
        QuestionKind::Other
    }
}

fn content(pos: Pos) -> bool {
    !matches!(pos, Pos::Det | Pos::Adp | Pos::Punct | Pos::Other)
}

fn b(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

/// Feature rows, one per context token.
pub fn features(inst: &Instance) -> Vec<Vec<f64>> {
    let q: HashSet<&str> = inst.question.tokens().iter().filter(|t| content(t.pos)).map(|t| t.lower.as_str()).collect();
    let toks = inst.context.tokens();
    let n = toks.len();
    let hit: Vec<bool> = toks.iter().map(|t| content(t.pos) && q.contains(t.lower.as_str())).collect();
    let kind = question_kind(inst);

    let mut best_sentence = None;
    let mut best_overlap = 0usize;
    for r in inst.sentences() {
        let c = hit[r.clone()].iter().filter(|h| **h).count();
        if c > best_overlap {
            best_overlap = c;
            best_sentence = Some(r.clone());
        }
    }
    let hits: Vec<usize> = (0..n).filter(|&i| hit[i]).collect();

    (0..n)
        .map(|i| {
            let t = &toks[i];
            let prev = i.checked_sub(1).map(|j| &toks[j]);
            let next = toks.get(i + 1);
            let year = t.shape == "dddd";
            let date_word = is_month(&t.lower) || is_weekday(&t.lower);
            let nearest = hits.iter().map(|&h| h.abs_diff(i)).min();
            let f = vec![
                1.0,
                b(hit[i]),
                b(i > 0 && hit[i - 1]),
                b(i + 1 < n && hit[i + 1]),
                b((i.saturating_sub(3)..i).any(|j| hit[j])),
                b((i + 1..(i + 4).min(n)).any(|j| hit[j])),
                nearest.map_or(0.0, |d| 1.0 / (1.0 + d as f64)),
                b(t.pos == Pos::Num),
                b(t.pos == Pos::Propn),
                b(t.pos == Pos::Noun),
                b(t.pos == Pos::Adj),
                b(t.pos == Pos::Verb),
                b(t.pos == Pos::Det),
                b(t.pos == Pos::Adp),
                b(t.pos == Pos::Punct),
                b(t.text.chars().next().is_some_and(char::is_uppercase)),
                b(year),
                b(date_word),
                b(prev.is_some_and(|p| p.pos == Pos::Adp)),
                b(prev.is_some_and(|p| p.pos == Pos::Punct)),
                b(next.is_none_or(|p| p.pos == Pos::Punct)),
                b(kind == QuestionKind::Temporal && (year || date_word || t.pos == Pos::Num)),
                b(kind == QuestionKind::Person && t.pos == Pos::Propn),
                b(kind == QuestionKind::Number && t.pos == Pos::Num),
                b(kind == QuestionKind::Location && t.pos == Pos::Propn),
                if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 },
                b(best_sentence.as_ref().is_some_and(|r| r.contains(&i))),
            ];
            debug_assert_eq!(f.len(), NUM_FEATURES);
            f
        })
        .collect()
}

fn dot(w: &[f64], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

fn softmax(s: &[f64]) -> Vec<f64> {
    let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = s.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Negative log-likelihood of `target` and its gradient, from precomputed
/// feature rows.
pub(crate) fn item_loss(student: &Student, feats: &[Vec<f64>], target: Span) -> (f64, StudentGrad) {
    let mut grad = StudentGrad::zeros();
    let mut loss = 0.0;
    for (w, g, gold) in [(&student.start, &mut grad.start, target.start), (&student.end, &mut grad.end, target.end)] {
        let scores: Vec<f64> = feats.iter().map(|f| dot(w, f)).collect();
        let p = softmax(&scores);
        loss -= p[gold].max(f64::MIN_POSITIVE).ln();
        for (i, f) in feats.iter().enumerate() {
            let coef = p[i] - if i == gold { 1.0 } else { 0.0 };
            for (gk, fk) in g.iter_mut().zip(f) {
                *gk += coef * fk;
            }
        }
    }
    (loss, grad)
}

pub(crate) fn weighted_loss(student: &Student, items: &[(&[Vec<f64>], Span)], weights: &[f64]) -> (f64, StudentGrad) {
    let mut total = 0.0;
    let mut grad = StudentGrad::zeros();
    for ((feats, span), w) in items.iter().zip(weights) {
        let (l, g) = item_loss(student, feats, *span);
        total += w * l;
        grad.add_scaled(&g, *w);
    }
    (total, grad)
}

/// Weighted span loss over a batch, with its gradient.
pub fn mrc_loss(student: &Student, batch: &[(&Instance, Span)], weights: &[f64]) -> Result<(f64, StudentGrad), LossError> {
    if batch.len() != weights.len() {
        return Err(LossError::LengthMismatch { items: batch.len(), weights: weights.len() });
    }
    let mut feats = Vec::with_capacity(batch.len());
    for (inst, span) in batch {
        if !span.is_valid_in(&inst.context) {
            return Err(LossError::TargetOutOfRange { id: inst.id.clone(), span: *span });
        }
        feats.push(features(inst));
    }
    let items: Vec<(&[Vec<f64>], Span)> = feats.iter().zip(batch).map(|(f, (_, s))| (f.as_slice(), *s)).collect();
    Ok(weighted_loss(student, &items, weights))
}

/// Uniformly weighted batch loss.
pub fn mrc_loss_mean(student: &Student, batch: &[(&Instance, Span)]) -> Result<(f64, StudentGrad), LossError> {
    let w = vec![1.0 / batch.len().max(1) as f64; batch.len()];
    mrc_loss(student, batch, &w)
}

impl Student {
    pub fn new(max_len: usize) -> Self {
        Student {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            start: vec![0.0; NUM_FEATURES],
            end: vec![0.0; NUM_FEATURES],
            max_len: max_len.max(1),
        }
    }

    pub(crate) fn predict_features(&self, feats: &[Vec<f64>]) -> Option<Span> {
        let s: Vec<f64> = feats.iter().map(|f| dot(&self.start, f)).collect();
        let e: Vec<f64> = feats.iter().map(|f| dot(&self.end, f)).collect();
        let mut best: Option<(f64, Span)> = None;
        for i in 0..feats.len() {
            for j in i..(i + self.max_len).min(feats.len()) {
                let v = s[i] + e[j];
                if best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, Span::new(i, j)));
                }
            }
        }
        best.map(|(_, sp)| sp)
    }

    /// Highest-scoring span; ties go to the earliest. `None` on empty context.
    pub fn predict(&self, inst: &Instance) -> Option<Span> {
        self.predict_features(&features(inst))
    }

    pub fn is_finite(&self) -> bool {
        self.start.iter().chain(&self.end).all(|v| v.is_finite())
    }
}

/// The student's own predictions as targets.
pub fn pseudo_label<'a>(student: &Student, batch: &[&'a Instance]) -> Vec<(&'a Instance, Span)> {
    batch.iter().filter_map(|i| student.predict(i).map(|s| (*i, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst() -> Instance {
        Instance::with_answer_text("a", "When was it declared?", "It was declared on 24 September 1973.", Some("24 September 1973"))
    }

    #[test]
    fn uniform_student_picks_first_token() {
        let s = Student::default();
        assert_eq!(s.predict(&inst()), Some(Span::single(0)));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let i = inst();
        let mut s = Student::default();
        for (k, w) in s.start.iter_mut().enumerate() {
            *w = (k as f64 * 0.37).sin();
        }
        for (k, w) in s.end.iter_mut().enumerate() {
            *w = (k as f64 * 0.11).cos();
        }
        let gold = i.gold.unwrap();
        let (_, g) = mrc_loss(&s, &[(&i, gold)], &[1.0]).unwrap();
        let h = 1e-6;
        for k in 0..NUM_FEATURES {
            let mut p = s.clone();
            p.start[k] += h;
            let mut m = s.clone();
            m.start[k] -= h;
            let num = (mrc_loss(&p, &[(&i, gold)], &[1.0]).unwrap().0 - mrc_loss(&m, &[(&i, gold)], &[1.0]).unwrap().0) / (2.0 * h);
            assert!((num - g.start[k]).abs() <= 1e-5 * (1.0 + num.abs()), "feature {k}");
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let i = inst();
        let s = Student::default();
        assert!(matches!(mrc_loss(&s, &[(&i, Span::new(0, 99))], &[1.0]), Err(LossError::TargetOutOfRange { .. })));
        assert!(matches!(mrc_loss(&s, &[(&i, Span::new(0, 0))], &[]), Err(LossError::LengthMismatch { .. })));
    }
}
