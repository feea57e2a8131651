//! Pair-based training of the bilinear Fill backend.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backend::{attentive_pool, Bilinear, BilinearParams, SimilarityBackend};
use super::fill::fill_candidates;
use crate::corpus::{Span, TokenSeq, DEFAULT_MAX_LEN};

/// A reference span and the span that plays its role in another sentence.
#[derive(Debug, Clone)]
pub struct FillPair {
    pub s_ref: TokenSeq,
    pub p_ref: Span,
    pub s: TokenSeq,
    pub p_pos: Span,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FillTrainConfig {
    pub neg_per_pos: usize,
    pub epochs: usize,
    pub seed: u64,
    pub margin: f64,
    pub lr: f64,
}

impl Default for FillTrainConfig {
    fn default() -> Self {
        FillTrainConfig { neg_per_pos: 3, epochs: 10, seed: 0, margin: 0.4, lr: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FillTrainReport {
    pub params: BilinearParams,
    pub initial_accuracy: f64,
    pub final_accuracy: f64,
    pub train_pairs: usize,
    pub heldout_pairs: usize,
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FillTrainError {
    #[error("no training pairs")]
    EmptyPairs,
    #[error("pair {0} has spans outside its sentences")]
    BadPair(usize),
}

/// Gradient of the margin loss with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Grad {
    pub a: Vec<f64>,
    pub b: f64,
    pub v: Vec<f64>,
}

impl Grad {
    fn zeros(d: usize) -> Self {
        Grad { a: vec![0.0; d * d], b: 0.0, v: vec![0.0; d] }
    }
}

/// `d pool(H, v) / dv` contracted with an upstream gradient `g`.
fn pool_backward(h: &[Vec<f64>], alpha: &[f64], e: &[f64], g: &[f64], out_v: &mut [f64]) {
    // d e / d v_m = sum_i alpha_i h_i (h_im - e_m)
    for (hi, ai) in h.iter().zip(alpha) {
        let gh: f64 = g.iter().zip(hi).map(|(x, y)| x * y).sum();
        for m in 0..out_v.len() {
            out_v[m] += ai * gh * (hi[m] - e[m]);
        }
    }
}

/// `max(0, m - sim(r, p) + sim(r, n))` and its gradient, where each
/// argument is a matrix of token vectors.
pub fn triple_loss_grad(params: &BilinearParams, h_r: &[Vec<f64>], h_p: &[Vec<f64>], h_n: &[Vec<f64>], margin: f64) -> (f64, Grad) {
    let d = params.dim;
    let (e_r, a_r) = attentive_pool(h_r, &params.v);
    let (e_p, a_p) = attentive_pool(h_p, &params.v);
    let (e_n, a_n) = attentive_pool(h_n, &params.v);
    let s_p = (params.form(&e_r, &e_p) + params.b).tanh();
    let s_n = (params.form(&e_r, &e_n) + params.b).tanh();
    let loss = margin - s_p + s_n;
    let mut g = Grad::zeros(d);
    if loss <= 0.0 {
        return (0.0, g);
    }
    // dL/du for u = e A f + b through tanh.
    let cp = -(1.0 - s_p * s_p);
    let cn = 1.0 - s_n * s_n;
    for i in 0..d {
        for j in 0..d {
            g.a[i * d + j] = cp * e_r[i] * e_p[j] + cn * e_r[i] * e_n[j];
        }
    }
    g.b = cp + cn;
    // dL/de_r = cp * A e_p + cn * A e_n ; dL/de_p = cp * A^T e_r ; dL/de_n = cn * A^T e_r
    let mut g_r = vec![0.0; d];
    let mut g_p = vec![0.0; d];
    let mut g_n = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            let aij = params.a[i * d + j];
            g_r[i] += aij * (cp * e_p[j] + cn * e_n[j]);
            g_p[j] += cp * aij * e_r[i];
            g_n[j] += cn * aij * e_r[i];
        }
    }
    pool_backward(h_r, &a_r, &e_r, &g_r, &mut g.v);
    pool_backward(h_p, &a_p, &e_p, &g_p, &mut g.v);
    pool_backward(h_n, &a_n, &e_n, &g_n, &mut g.v);
    (loss, g)
}

fn sgd(params: &mut BilinearParams, g: &Grad, lr: f64) {
    for (p, d) in params.a.iter_mut().zip(&g.a) {
        *p -= lr * d;
    }
    params.b -= lr * g.b;
    for (p, d) in params.v.iter_mut().zip(&g.v) {
        *p -= lr * d;
    }
}

/// Fraction of pairs whose positive span ranks first among all candidates.
pub fn top1_accuracy(backend: &Bilinear, pairs: &[&FillPair]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let hits = pairs
        .iter()
        .filter(|p| {
            let anchor = backend.embed(&p.s_ref, p.p_ref);
            let best = fill_candidates(&p.s, 0, p.s.len(), DEFAULT_MAX_LEN.max(p.p_pos.len()))
                .into_iter()
                .map(|c| (backend.similarity(&anchor, &backend.embed(&p.s, c)), c))
                .fold(None::<(f64, Span)>, |acc, (sim, c)| match acc {
                    Some((bs, _)) if bs >= sim => acc,
                    _ => Some((sim, c)),
                });
            best.map(|(_, c)| c) == Some(p.p_pos)
        })
        .count();
    hits as f64 / pairs.len() as f64
}

/// Trains `start` with SGD on the margin loss. Pairs are split 80/20 into
/// training and held-out sets with the configured seed; with fewer than
/// five pairs every pair is used for both.
pub fn train_fill_backend(pairs: &[FillPair], start: BilinearParams, cfg: &FillTrainConfig) -> Result<FillTrainReport, FillTrainError> {
    if pairs.is_empty() {
        return Err(FillTrainError::EmptyPairs);
    }
    for (i, p) in pairs.iter().enumerate() {
        if !p.p_ref.is_valid_in(&p.s_ref) || !p.p_pos.is_valid_in(&p.s) {
            return Err(FillTrainError::BadPair(i));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);
    let (train_idx, held_idx): (Vec<usize>, Vec<usize>) = if pairs.len() < 5 {
        (order.clone(), order.clone())
    } else {
        let cut = (pairs.len() * 4) / 5;
        (order[..cut].to_vec(), order[cut..].to_vec())
    };
    let held: Vec<&FillPair> = held_idx.iter().map(|&i| &pairs[i]).collect();
    let mut backend = Bilinear::new(start);
    let initial_accuracy = top1_accuracy(&backend, &held);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut train = train_idx.clone();
    for _ in 0..cfg.epochs {
        train.shuffle(&mut rng);
        let mut total = 0.0;
        let mut count = 0usize;
        for &i in &train {
            let p = &pairs[i];
            let mut negs: Vec<Span> = fill_candidates(&p.s, 0, p.s.len(), DEFAULT_MAX_LEN.max(p.p_pos.len()))
                .into_iter()
                .filter(|c| *c != p.p_pos)
                .collect();
            negs.shuffle(&mut rng);
            negs.truncate(cfg.neg_per_pos);
            let h_r = backend.token_matrix(&p.s_ref, p.p_ref);
            let h_p = backend.token_matrix(&p.s, p.p_pos);
            for n in negs {
                let h_n = backend.token_matrix(&p.s, n);
                let (loss, g) = triple_loss_grad(&backend.params, &h_r, &h_p, &h_n, cfg.margin);
                total += loss;
                count += 1;
                sgd(&mut backend.params, &g, cfg.lr);
            }
        }
        epoch_losses.push(if count > 0 { total / count as f64 } else { 0.0 });
    }
    let final_accuracy = top1_accuracy(&backend, &held);
    Ok(FillTrainReport {
        params: backend.params,
        initial_accuracy,
        final_accuracy,
        train_pairs: train_idx.len(),
        heldout_pairs: held.len(),
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use rand::Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let d = 5;
            let mut params = BilinearParams::identity(d);
            params.a.iter_mut().for_each(|x| *x += rng.gen_range(-0.3..0.3));
            params.v.iter_mut().for_each(|x| *x = rng.gen_range(-0.5..0.5));
            params.b = rng.gen_range(-0.2..0.2);
            let (hr, hp, hn) = (random_matrix(&mut rng, 3, d), random_matrix(&mut rng, 2, d), random_matrix(&mut rng, 4, d));
            let margin = 2.0; // keeps the hinge active
            let (_, g) = triple_loss_grad(&params, &hr, &hp, &hn, margin);
            let f = |p: &BilinearParams| triple_loss_grad(p, &hr, &hp, &hn, margin).0;
            let eps = 1e-6;
            for k in 0..d * d {
                let (mut up, mut dn) = (params.clone(), params.clone());
                up.a[k] += eps;
                dn.a[k] -= eps;
                assert!(rel_err((f(&up) - f(&dn)) / (2.0 * eps), g.a[k]) < 1e-4);
            }
            for k in 0..d {
                let (mut up, mut dn) = (params.clone(), params.clone());
                up.v[k] += eps;
                dn.v[k] -= eps;
                assert!(rel_err((f(&up) - f(&dn)) / (2.0 * eps), g.v[k]) < 1e-4, "v[{k}]");
            }
            let (mut up, mut dn) = (params.clone(), params.clone());
            up.b += eps;
            dn.b -= eps;
            assert!(rel_err((f(&up) - f(&dn)) / (2.0 * eps), g.b) < 1e-4);
        }
    }

    fn pair(r: &str, rp: (usize, usize), s: &str, sp: (usize, usize)) -> FillPair {
        FillPair { s_ref: tokenize(r), p_ref: Span::new(rp.0, rp.1), s: tokenize(s), p_pos: Span::new(sp.0, sp.1) }
    }

    #[test]
    fn zero_epochs_is_noop_and_empty_is_error() {
        let p = vec![pair("When was the treaty signed ?", (3, 3), "When was the castle built ?", (3, 3))];
        let start = BilinearParams::identity(16);
        let cfg = FillTrainConfig { epochs: 0, ..Default::default() };
        let report = train_fill_backend(&p, start.clone(), &cfg).unwrap();
        assert_eq!(report.params, start);
        assert_eq!(train_fill_backend(&[], start, &cfg).unwrap_err(), FillTrainError::EmptyPairs);
    }

    #[test]
    fn single_pair_loss_decreases() {
        let p = pair("When was the treaty signed ?", (3, 3), "When was the castle built ?", (3, 3));
        let mut params = BilinearParams::identity(32);
        let b = Bilinear::new(params.clone());
        let h_r = b.token_matrix(&p.s_ref, p.p_ref);
        let h_p = b.token_matrix(&p.s, p.p_pos);
        let h_n = b.token_matrix(&p.s, Span::single(4));
        let mut losses = Vec::new();
        for _ in 0..10 {
            let (l, g) = triple_loss_grad(&params, &h_r, &h_p, &h_n, 0.4);
            losses.push(l);
            sgd(&mut params, &g, 0.05);
        }
        assert!(losses[0] > 0.0);
        assert!(losses.windows(2).all(|w| w[1] <= w[0]), "{losses:?}");
        assert!(losses[9] < losses[0]);
    }
}
