/// Soft confidence that `d1 <= d0` holds.
///
/// 1 when it holds, otherwise `max(1 - ((d1 - d0) / (|d0| + 1))^2 / 4, 0)`.
pub fn compare_soft(d0: i64, d1: i64) -> f64 {
    if d1 <= d0 {
        return 1.0;
    }
    let r = (d1 - d0) as f64 / (d0.abs() as f64 + 1.0);
    (1.0 - 0.25 * r * r).max(0.0)
}

pub fn compare_strict(d0: i64, d1: i64) -> f64 {
    if d1 <= d0 {
        1.0
    } else {
        0.0
    }
}

pub fn compare(d0: i64, d1: i64, soft: bool) -> f64 {
    if soft {
        compare_soft(d0, d1)
    } else {
        compare_strict(d0, d1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert_eq!(compare_soft(0, 1), 0.75);
        assert_eq!(compare_soft(0, 5), 0.0);
        assert_eq!(compare_soft(4, 2), 1.0);
        assert_eq!(compare_soft(3, 5), 0.9375);
        assert!((compare_soft(2, 3) - 35.0 / 36.0).abs() < 1e-15);
        assert_eq!(compare_strict(0, 0), 1.0);
        assert_eq!(compare_strict(0, 1), 0.0);
        assert_eq!(compare_strict(3, 5), 0.0);
    }
}
