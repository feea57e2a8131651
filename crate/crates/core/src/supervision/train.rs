//! Student training from labeled splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::corpus::{align_chars, Alignment, Corpus, Instance, Span};
use crate::pipeline::LabeledSplits;

use super::student::{features, weighted_loss, Student};
use super::weights::{batch_weights, blended_loss, rotation_schedule, BatchKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub theta_t: f64,
    pub beta: f64,
    pub rotation: usize,
    pub batch_size: usize,
    pub soft_batch_size: usize,
    pub unlabeled_batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub l2: f64,
    pub seed: u64,
    pub max_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            theta_t: 2.0,
            beta: 0.3,
            rotation: 8,
            batch_size: 16,
            soft_batch_size: 16,
            unlabeled_batch_size: 16,
            epochs: 10,
            lr: 0.5,
            l2: 1e-4,
            seed: 0,
            max_len: crate::corpus::DEFAULT_MAX_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainMode {
    #[serde(rename = "sa")]
    SaOnly,
    #[serde(rename = "da")]
    Da,
    #[serde(rename = "da+pl")]
    DaPl,
}

impl FromStr for TrainMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sa" => Ok(TrainMode::SaOnly),
            "da" => Ok(TrainMode::Da),
            "da+pl" => Ok(TrainMode::DaPl),
            other => Err(format!("unknown training mode {other:?} (expected sa, da or da+pl)")),
        }
    }
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::SaOnly => "sa",
            TrainMode::Da => "da",
            TrainMode::DaPl => "da+pl",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("the strict split is empty")]
    EmptyStrict,
    #[error("instance {0:?} is not in the corpus")]
    UnknownInstance(String),
    #[error("offsets [{start}, {end}) do not map onto tokens of {id}")]
    BadOffsets { id: String, start: usize, end: usize },
    #[error("invalid config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub steps: usize,
    pub epoch_losses: Vec<f64>,
}

struct Example {
    feats: Vec<Vec<f64>>,
    span: Span,
    z: f64,
}

fn example(corpus: &Corpus, id: &str, start: usize, end: usize, z: f64) -> Result<Example, TrainError> {
    let inst = corpus.get(id).ok_or_else(|| TrainError::UnknownInstance(id.to_string()))?;
    let span = match align_chars(&inst.context, start, end) {
        Alignment::Exact(s) | Alignment::Snapped(s) => s,
        Alignment::Unresolved => return Err(TrainError::BadOffsets { id: id.to_string(), start, end }),
    };
    Ok(Example { feats: features(inst), span, z })
}

fn step(student: &mut Student, grad: &super::student::StudentGrad, cfg: &TrainConfig) {
    for (w, g) in student.start.iter_mut().zip(&grad.start) {
        *w -= cfg.lr * (g + cfg.l2 * *w);
    }
    for (w, g) in student.end.iter_mut().zip(&grad.end) {
        *w -= cfg.lr * (g + cfg.l2 * *w);
    }
}

/// Cycles through a shuffled index list, reshuffling on wrap.
struct Cycler {
    order: Vec<usize>,
    pos: usize,
}

impl Cycler {
    fn new(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Cycler { order, pos: 0 }
    }

    fn take(&mut self, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut out = Vec::with_capacity(k);
        while out.len() < k.min(self.order.len()) {
            if self.pos == self.order.len() {
                self.order.shuffle(rng);
                self.pos = 0;
            }
            out.push(self.order[self.pos]);
            self.pos += 1;
        }
        out
    }
}

/// Trains a student on the strict split, optionally adding confidence
/// weighted soft batches and pseudo-labeled unlabeled batches.
pub fn train_student(splits: &LabeledSplits, corpus: &Corpus, cfg: &TrainConfig, mode: TrainMode) -> Result<(Student, TrainReport), TrainError> {
    if cfg.batch_size == 0 || cfg.rotation == 0 || cfg.beta < 0.0 {
        return Err(TrainError::Config("batch_size and rotation must be positive and beta non-negative".into()));
    }
    if splits.strict.is_empty() {
        return Err(TrainError::EmptyStrict);
    }
    let strict: Vec<Example> = splits.strict.iter().map(|e| example(corpus, &e.instance_id, e.char_start, e.char_end, 1.0)).collect::<Result<_, _>>()?;
    let soft: Vec<Example> = splits.soft.iter().map(|e| example(corpus, &e.instance_id, e.char_start, e.char_end, e.z)).collect::<Result<_, _>>()?;
    let strict_ids: BTreeSet<&str> = splits.strict.iter().map(|e| e.instance_id.as_str()).collect();
    let mut unlabeled: Vec<(&Instance, Vec<Vec<f64>>)> = Vec::new();
    if mode == TrainMode::DaPl {
        for id in &splits.unlabeled {
            if strict_ids.contains(id.as_str()) {
                continue;
            }
            let inst = corpus.get(id).ok_or_else(|| TrainError::UnknownInstance(id.clone()))?;
            unlabeled.push((inst, features(inst)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut student = Student::new(cfg.max_len);
    let mut report = TrainReport::default();
    let mut soft_cycle = Cycler::new(soft.len(), &mut rng);
    let mut unl_cycle = Cycler::new(unlabeled.len(), &mut rng);
    let mut order: Vec<usize> = (0..strict.len()).collect();

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let items: Vec<(&[Vec<f64>], Span)> = chunk.iter().map(|&i| (strict[i].feats.as_slice(), strict[i].span)).collect();
            let w = vec![1.0 / items.len() as f64; items.len()];
            let (l_a, mut grad) = weighted_loss(&student, &items, &w);

            let kind = match mode {
                TrainMode::SaOnly => None,
                TrainMode::Da => Some(BatchKind::Soft),
                TrainMode::DaPl => Some(rotation_schedule(report.steps, cfg.rotation)),
            };
            let other = match kind {
                Some(BatchKind::Soft) if !soft.is_empty() => {
                    let idx = soft_cycle.take(cfg.soft_batch_size.max(1), &mut rng);
                    let z: Vec<f64> = idx.iter().map(|&i| soft[i].z).collect();
                    let w = batch_weights(&z, cfg.theta_t).expect("soft confidences are in [0, 1]");
                    let items: Vec<(&[Vec<f64>], Span)> = idx.iter().map(|&i| (soft[i].feats.as_slice(), soft[i].span)).collect();
                    Some(weighted_loss(&student, &items, &w))
                }
                Some(BatchKind::Unlabeled) if !unlabeled.is_empty() => {
                    let idx = unl_cycle.take(cfg.unlabeled_batch_size.max(1), &mut rng);
                    let items: Vec<(&[Vec<f64>], Span)> = idx
                        .iter()
                        .filter_map(|&i| student.predict_features(&unlabeled[i].1).map(|s| (unlabeled[i].1.as_slice(), s)))
                        .collect();
                    let w = vec![1.0 / items.len().max(1) as f64; items.len()];
                    Some(weighted_loss(&student, &items, &w))
                }
                _ => None,
            };
            let total = match other {
                Some((l_o, g_o)) => {
                    grad.add_scaled(&g_o, cfg.beta);
                    blended_loss(l_a, l_o, cfg.beta)
                }
                None => l_a,
            };
            step(&mut student, &grad, cfg);
            report.steps += 1;
            epoch_loss += total;
            batches += 1;
        }
        report.epoch_losses.push(epoch_loss / batches.max(1) as f64);
    }
    Ok((student, report))
}

/// Span predictions as answer strings, keyed by instance id.
pub fn predict_corpus<'a>(student: &Student, instances: impl IntoIterator<Item = &'a Instance>) -> std::collections::BTreeMap<String, String> {
    instances
        .into_iter()
        .map(|i| {
            let text = student.predict(i).map(|s| s.text(&i.context).to_string()).unwrap_or_default();
            (i.id.clone(), text)
        })
        .collect()
}
