//! The plan/skill-use/correctness weighted score.

use serde::{Deserialize, Serialize};

use super::ScoreError;

/// One judged run's quality on the 10-point and percentage scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedScore {
    pub s10: f64,
    pub s100: f64,
}

fn check_dimension(dimension: &'static str, value: f64) -> Result<(), ScoreError> {
    if !value.is_finite() || !(1.0..=10.0).contains(&value) {
        return Err(ScoreError::DimensionOutOfRange { dimension, value });
    }
    Ok(())
}

/// `s10 = 0.30 P + 0.40 R + 0.30 C`, `s100 = 10 s10`. Each dimension
/// must lie in [1,10].
pub fn weighted_score(p: f64, r: f64, c: f64) -> Result<WeightedScore, ScoreError> {
    check_dimension("P", p)?;
    check_dimension("R", r)?;
    check_dimension("C", c)?;
    let s10 = 0.30 * p + 0.40 * r + 0.30 * c;
    Ok(WeightedScore { s10, s100: 10.0 * s10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn anchor_values() {
        let top = weighted_score(10.0, 10.0, 10.0).unwrap();
        assert_eq!((top.s10, top.s100), (10.0, 100.0));
        let mid = weighted_score(6.0, 7.0, 8.0).unwrap();
        assert!((mid.s10 - 7.0).abs() < 1e-12);
        assert!((mid.s100 - 70.0).abs() < 1e-12);
        let bottom = weighted_score(1.0, 1.0, 1.0).unwrap();
        assert!((bottom.s10 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_errors_name_the_dimension() {
        let err = weighted_score(5.0, 11.0, 5.0).unwrap_err();
        assert!(err.to_string().contains('R'), "{err}");
        assert!(weighted_score(0.5, 5.0, 5.0).is_err());
        assert!(weighted_score(5.0, 5.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(
            p in 1.0f64..=10.0,
            r in 1.0f64..=10.0,
            c in 1.0f64..=10.0,
            bump in 0.0f64..=2.0,
        ) {
            let base = weighted_score(p, r, c).unwrap();
            prop_assert!((1.0..=10.0).contains(&base.s10));
            prop_assert_eq!(base.s100, 10.0 * base.s10);
            let bumped = weighted_score((p + bump).min(10.0), r, c).unwrap();
            prop_assert!(bumped.s10 >= base.s10 - 1e-12);
        }
    }
}
