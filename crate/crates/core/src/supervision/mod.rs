//! Training signals from labeled splits: weighting, the student and evaluation.

mod eval;
mod student;
mod train;
mod weights;

pub use eval::{evaluate, exact_match, f1_score, normalize_answer, EvalError, Metrics};
pub use student::{features, mrc_loss, mrc_loss_mean, pseudo_label, LossError, Student, StudentGrad, FEATURE_NAMES, NUM_FEATURES};
pub use train::{predict_corpus, train_student, TrainConfig, TrainError, TrainMode, TrainReport};
pub use weights::{batch_weights, blended_loss, rotation_schedule, BatchKind, WeightError};
