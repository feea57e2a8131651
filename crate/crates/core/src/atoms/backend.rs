//! Span embedding and similarity backends.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{Span, Token, TokenSeq};

pub trait SimilarityBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn embed(&self, seq: &TokenSeq, span: Span) -> Vec<f64>;
    /// A value in `[-1, 1]`.
    fn similarity(&self, a: &[f64], b: &[f64]) -> f64;

    fn span_similarity(&self, a_seq: &TokenSeq, a: Span, b_seq: &TokenSeq, b: Span) -> f64 {
        self.similarity(&self.embed(a_seq, a), &self.embed(b_seq, b))
    }
}

/// Maps a similarity in `[-1, 1]` to a score in `[0, 1]`.
pub fn to_unit(sim: f64) -> f64 {
    ((sim + 1.0) / 2.0).clamp(0.0, 1.0)
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn bucket(feature: &str, dim: usize) -> usize {
    (fnv1a(feature.as_bytes()) % dim as u64) as usize
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Hashed word, character-trigram, part-of-speech and shape features of a
/// single token, added into `out`.
pub fn add_token_features(tok: &Token, out: &mut [f64], weight: f64) {
    let dim = out.len();
    out[bucket(&format!("w:{}", tok.lower), dim)] += weight;
    let padded: Vec<char> = format!("<{}>", tok.lower).chars().collect();
    let grams = padded.len().saturating_sub(2).max(1);
    for w in padded.windows(3) {
        let g: String = w.iter().collect();
        out[bucket(&format!("c:{g}"), dim)] += weight / grams as f64;
    }
    out[bucket(&format!("p:{}", tok.pos.as_str()), dim)] += weight;
    out[bucket(&format!("s:{}", tok.shape), dim)] += 0.5 * weight;
}

fn add_context_features(seq: &TokenSeq, span: Span, out: &mut [f64], weight: f64) {
    let dim = out.len();
    let toks = seq.tokens();
    let (left, right) = (span.start.checked_sub(1).map(|i| &toks[i]), toks.get(span.end + 1));
    match left {
        Some(t) => {
            out[bucket(&format!("lw:{}", t.lower), dim)] += weight;
            out[bucket(&format!("lp:{}", t.pos.as_str()), dim)] += weight;
        }
        None => out[bucket("lw:<s>", dim)] += weight,
    }
    match right {
        Some(t) => {
            out[bucket(&format!("rw:{}", t.lower), dim)] += weight;
            out[bucket(&format!("rp:{}", t.pos.as_str()), dim)] += weight;
        }
        None => out[bucket("rw:</s>", dim)] += weight,
    }
}

/// Indicator embedding of the case-folded span text.
#[derive(Debug, Clone)]
pub struct ExactMatch {
    pub dim: usize,
}

impl Default for ExactMatch {
    fn default() -> Self {
        ExactMatch { dim: 4096 }
    }
}

impl SimilarityBackend for ExactMatch {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, seq: &TokenSeq, span: Span) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        v[bucket(&span.lowers(seq).join(" "), self.dim)] = 1.0;
        v
    }

    fn similarity(&self, a: &[f64], b: &[f64]) -> f64 {
        if dot(a, b) > 0.5 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Mean-pooled hashed lexical features with cosine similarity. With
/// `context` set, neighbouring-token features are added to each span.
#[derive(Debug, Clone)]
pub struct Lexical {
    pub dim: usize,
    pub context: bool,
}

impl Lexical {
    pub const DEFAULT_DIM: usize = 512;

    pub fn plain() -> Self {
        Lexical { dim: Self::DEFAULT_DIM, context: false }
    }

    pub fn with_context() -> Self {
        Lexical { dim: Self::DEFAULT_DIM, context: true }
    }
}

impl SimilarityBackend for Lexical {
    fn name(&self) -> &'static str {
        if self.context {
            "lexical-context"
        } else {
            "lexical"
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, seq: &TokenSeq, span: Span) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let n = span.len() as f64;
        for tok in &seq.tokens()[span.start..=span.end] {
            add_token_features(tok, &mut v, 1.0 / n);
        }
        if self.context {
            add_context_features(seq, span, &mut v, 0.5);
        }
        v
    }

    fn similarity(&self, a: &[f64], b: &[f64]) -> f64 {
        cosine(a, b)
    }
}

/// Trainable parameters of [`Bilinear`]: `sim(e, e') = tanh(e A e' + b)`
/// over attention-pooled token vectors with attention weights
/// `softmax(v . h_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearParams {
    pub dim: usize,
    /// Row-major `dim x dim`.
    pub a: Vec<f64>,
    pub b: f64,
    pub v: Vec<f64>,
}

impl BilinearParams {
    /// Identity `A`, zero bias, uniform attention.
    pub fn identity(dim: usize) -> Self {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        BilinearParams { dim, a, b: 0.0, v: vec![0.0; dim] }
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.a.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// `e^T A f`.
    pub fn form(&self, e: &[f64], f: &[f64]) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            if e[i] == 0.0 {
                continue;
            }
            s += e[i] * dot(&self.a[i * d..(i + 1) * d], f);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Bilinear {
    pub params: BilinearParams,
}

impl Bilinear {
    pub const DEFAULT_DIM: usize = 64;

    pub fn new(params: BilinearParams) -> Self {
        Bilinear { params }
    }

    pub fn untrained() -> Self {
        Bilinear::new(BilinearParams::identity(Self::DEFAULT_DIM))
    }

    /// Unit-normalised hashed feature vector per span token.
    pub fn token_matrix(&self, seq: &TokenSeq, span: Span) -> Vec<Vec<f64>> {
        let d = self.params.dim;
        seq.tokens()[span.start..=span.end]
            .iter()
            .map(|tok| {
                let mut h = vec![0.0; d];
                add_token_features(tok, &mut h, 1.0);
                let n = norm(&h);
                if n > 0.0 {
                    h.iter_mut().for_each(|x| *x /= n);
                }
                h
            })
            .collect()
    }

    /// Pooled vector and attention weights.
    pub fn pool(&self, h: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        attentive_pool(h, &self.params.v)
    }
}

pub fn attentive_pool(h: &[Vec<f64>], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = v.len();
    if h.is_empty() {
        return (vec![0.0; d], Vec::new());
    }
    let logits: Vec<f64> = h.iter().map(|hi| dot(hi, v)).collect();
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    let alpha: Vec<f64> = exps.iter().map(|e| e / z).collect();
    let mut e = vec![0.0; d];
    for (hi, a) in h.iter().zip(&alpha) {
        for k in 0..d {
            e[k] += a * hi[k];
        }
    }
    (e, alpha)
}

impl SimilarityBackend for Bilinear {
    fn name(&self) -> &'static str {
        "bilinear"
    }

    fn dim(&self) -> usize {
        self.params.dim
    }

    fn embed(&self, seq: &TokenSeq, span: Span) -> Vec<f64> {
        self.pool(&self.token_matrix(seq, span)).0
    }

    fn similarity(&self, a: &[f64], b: &[f64]) -> f64 {
        (self.params.form(a, b) + self.params.b).tanh()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Pooling {
    Mean,
    Attentive(Vec<f64>),
}

#[derive(Debug, thiserror::Error)]
pub enum VectorFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("vector file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Pre-computed per-token vectors; unknown tokens embed as zero.
#[derive(Debug, Clone)]
pub struct ExternalVectors {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
    pub pooling: Pooling,
}

impl ExternalVectors {
    pub fn load(path: &Path) -> Result<Self, VectorFileError> {
        let text = fs::read_to_string(path).map_err(|source| VectorFileError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Header `d n`, then `n` lines of `token v1 .. vd`.
    pub fn parse(text: &str) -> Result<Self, VectorFileError> {
        let fmt_err = |line: usize, message: String| VectorFileError::Format { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| fmt_err(1, "missing header".into()))?;
        let nums: Vec<&str> = header.split_whitespace().collect();
        let (dim, n) = match nums[..] {
            [d, n] => (
                d.parse::<usize>().map_err(|e| fmt_err(1, format!("dimension: {e}")))?,
                n.parse::<usize>().map_err(|e| fmt_err(1, format!("count: {e}")))?,
            ),
            _ => return Err(fmt_err(1, "header must be \"d n\"".into())),
        };
        if dim == 0 {
            return Err(fmt_err(1, "dimension must be positive".into()));
        }
        let mut table = HashMap::new();
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap_or_default().to_string();
            let v = parts
                .map(|p| p.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| fmt_err(i + 1, "non-numeric or non-finite value".into()))?;
            if v.len() != dim {
                return Err(fmt_err(i + 1, format!("expected {dim} values, found {}", v.len())));
            }
            table.insert(token, v);
        }
        if table.len() != n {
            return Err(fmt_err(1, format!("header promises {n} vectors, found {}", table.len())));
        }
        Ok(ExternalVectors { dim, table, pooling: Pooling::Mean })
    }

    pub fn vector(&self, tok: &Token) -> Vec<f64> {
        self.table
            .get(&tok.text)
            .or_else(|| self.table.get(&tok.lower))
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.dim])
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl SimilarityBackend for ExternalVectors {
    fn name(&self) -> &'static str {
        "external"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, seq: &TokenSeq, span: Span) -> Vec<f64> {
        let h: Vec<Vec<f64>> = seq.tokens()[span.start..=span.end].iter().map(|t| self.vector(t)).collect();
        match &self.pooling {
            Pooling::Mean => {
                let mut e = vec![0.0; self.dim];
                for hi in &h {
                    for k in 0..self.dim {
                        e[k] += hi[k] / h.len() as f64;
                    }
                }
                e
            }
            Pooling::Attentive(v) => attentive_pool(&h, v).0,
        }
    }

    fn similarity(&self, a: &[f64], b: &[f64]) -> f64 {
        cosine(a, b)
    }
}
