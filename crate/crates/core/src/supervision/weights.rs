//! Batch weighting, loss blending and the unlabeled/soft rotation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeightError {
    #[error("cannot weight an empty batch")]
    Empty,
    #[error("confidence {0} outside [0, 1]")]
    OutOfRange(f64),
}

/// Softmax of `theta * z` over the batch.
pub fn batch_weights(z: &[f64], theta: f64) -> Result<Vec<f64>, WeightError> {
    if z.is_empty() {
        return Err(WeightError::Empty);
    }
    if let Some(bad) = z.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(WeightError::OutOfRange(*bad));
    }
    let m = z.iter().map(|v| theta * v).fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (theta * v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    Ok(e.into_iter().map(|v| v / s).collect())
}

pub fn blended_loss(l_a: f64, l_other: f64, beta: f64) -> f64 {
    l_a + beta * l_other
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatchKind {
    Unlabeled,
    Soft,
}

/// `r` unlabeled steps, then one soft step, repeating.
///
/// # Panics
/// Panics if `r == 0`.
pub fn rotation_schedule(step: usize, r: usize) -> BatchKind {
    assert!(r >= 1, "rotation interval must be at least 1");
    if step % (r + 1) < r {
        BatchKind::Unlabeled
    } else {
        BatchKind::Soft
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        assert_eq!(batch_weights(&[0.1, 0.7, 0.3, 1.0], 0.0).unwrap(), vec![0.25; 4]);
        let w = batch_weights(&[1.0, 0.5], 2.0).unwrap();
        assert!((w[0] - 0.731059).abs() < 1e-5 && (w[1] - 0.268941).abs() < 1e-5);
        assert_eq!(batch_weights(&[0.9, 0.9], 7.0).unwrap(), vec![0.5, 0.5]);
        assert_eq!(batch_weights(&[], 1.0), Err(WeightError::Empty));
        assert_eq!(batch_weights(&[1.5], 1.0), Err(WeightError::OutOfRange(1.5)));
    }

    #[test]
    fn blend() {
        assert_eq!(blended_loss(1.0, 2.0, 0.5), 2.0);
        assert_eq!(blended_loss(1.25, 9.0, 0.0), 1.25);
        assert_eq!(blended_loss(0.0, 0.0, 0.3), 0.0);
    }

    #[test]
    fn rotation() {
        for s in 0..8 {
            assert_eq!(rotation_schedule(s, 8), BatchKind::Unlabeled);
        }
        assert_eq!(rotation_schedule(8, 8), BatchKind::Soft);
        assert_eq!(rotation_schedule(17, 8), BatchKind::Soft);
        assert_eq!((0..6).map(|s| rotation_schedule(s, 1)).collect::<Vec<_>>(), [BatchKind::Unlabeled, BatchKind::Soft].repeat(3));
    }
}
