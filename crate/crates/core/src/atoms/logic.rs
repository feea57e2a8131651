//! Łukasiewicz conjunction and disjunction.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("truth value {0} outside [0, 1]")]
pub struct DomainError(pub f64);

fn check(p: f64) -> Result<f64, DomainError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(DomainError(p))
    }
}

/// Rounds to 12 decimal places, so inputs on a decimal grid combine to the
/// nearest double of the exact grid value and the algebraic laws hold
/// without float drift.
fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

pub fn logic_and(p1: f64, p2: f64) -> Result<f64, DomainError> {
    Ok(snap((check(p1)? + check(p2)? - 1.0).max(0.0)))
}

pub fn logic_or(p1: f64, p2: f64) -> Result<f64, DomainError> {
    Ok(snap((check(p1)? + check(p2)?).min(1.0)))
}

/// Conjunction over any number of scores; the empty conjunction is 1.
pub fn and_all(ps: impl IntoIterator<Item = f64>) -> Result<f64, DomainError> {
    ps.into_iter().try_fold(1.0, logic_and)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert_eq!(logic_and(0.9, 0.8).unwrap(), 0.7);
        assert_eq!(logic_and(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(logic_or(0.5, 0.7).unwrap(), 1.0);
        assert_eq!(and_all([]).unwrap(), 1.0);
    }

    #[test]
    fn laws_hold_exactly_on_grid() {
        let g: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        for &a in &g {
            for &b in &g {
                assert_eq!(logic_and(a, b).unwrap(), logic_and(b, a).unwrap());
                for &c in &g {
                    let l = logic_and(logic_and(a, b).unwrap(), c).unwrap();
                    let r = logic_and(a, logic_and(b, c).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(logic_and(1.2, 0.5).is_err());
        assert!(logic_or(0.5, -0.1).is_err());
        assert!(logic_and(f64::NAN, 0.5).is_err());
    }
}
