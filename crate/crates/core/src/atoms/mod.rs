//! Fill, Find, Compare and Logic, each strict and soft, plus the
//! similarity backends behind the soft variants.

pub mod backend;
mod compare;
mod fill;
mod find;
mod logic;
mod train;

pub use backend::{
    cosine, to_unit, Bilinear, BilinearParams, ExactMatch, ExternalVectors, Lexical, Pooling, SimilarityBackend, VectorFileError,
};
pub use compare::{compare, compare_soft, compare_strict};
pub use fill::{fill_candidates, fill_soft, fill_soft_in, fill_strict, fill_strict_in, match_kind, MatchKind, ScoredSpan};
pub use find::{find_soft, find_soft_in, find_strict, find_strict_in, stem};
pub use logic::{and_all, logic_and, logic_or, DomainError};
pub use train::{top1_accuracy, train_fill_backend, triple_loss_grad, FillPair, FillTrainConfig, FillTrainError, FillTrainReport, Grad};
