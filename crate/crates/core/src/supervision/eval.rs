//! Exact-match and token-F1 scoring with SQuAD answer normalization.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no gold answers for prediction {0:?}")]
    MissingGold(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub exact_match: f64,
    pub f1: f64,
}

const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Lowercase, drop ASCII punctuation and articles, collapse whitespace.
pub fn normalize_answer(s: &str) -> String {
    let lower = s.to_lowercase();
    let no_punct: String = lower.chars().filter(|c| !c.is_ascii_punctuation()).collect();
    no_punct.split_whitespace().filter(|w| !ARTICLES.contains(w)).collect::<Vec<_>>().join(" ")
}

pub fn exact_match(pred: &str, gold: &str) -> bool {
    normalize_answer(pred) == normalize_answer(gold)
}

pub fn f1_score(pred: &str, gold: &str) -> f64 {
    let p = normalize_answer(pred);
    let g = normalize_answer(gold);
    let pt: Vec<&str> = p.split_whitespace().collect();
    let gt: Vec<&str> = g.split_whitespace().collect();
    let mut bag: HashMap<&str, usize> = HashMap::new();
    for t in &gt {
        *bag.entry(t).or_default() += 1;
    }
    let mut same = 0usize;
    for t in &pt {
        if let Some(c) = bag.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                same += 1;
            }
        }
    }
    if same == 0 {
        return 0.0;
    }
    let precision = same as f64 / pt.len() as f64;
    let recall = same as f64 / gt.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Macro-averaged EM and F1 (times 100) over the predictions, taking the
/// best gold answer per question.
pub fn evaluate(predictions: &BTreeMap<String, String>, gold: &BTreeMap<String, Vec<String>>) -> Result<Metrics, EvalError> {
    let mut em = 0.0;
    let mut f1 = 0.0;
    for (id, pred) in predictions {
        let answers = gold.get(id).filter(|a| !a.is_empty()).ok_or_else(|| EvalError::MissingGold(id.clone()))?;
        em += if answers.iter().any(|g| exact_match(pred, g)) { 1.0 } else { 0.0 };
        f1 += answers.iter().map(|g| f1_score(pred, g)).fold(0.0, f64::max);
    }
    let n = predictions.len().max(1) as f64;
    Ok(Metrics { exact_match: 100.0 * em / n, f1: 100.0 * f1 / n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize_answer("The  Music, of the Night!"), "music of night");
        assert!(exact_match("The 1995", "1995"));
    }

    #[test]
    fn partial_overlap() {
        assert!((f1_score("2 February", "Saturday, 2 February") - 0.8).abs() < 1e-12);
        assert_eq!(f1_score("x", "y"), 0.0);
    }
}
