//! Robust review and paper scores.
//!
//! A review's effective score is the trimmed mean of its readers' scores,
//! held at zero until enough readers have scored it. A paper's score is the
//! average of its reviewers' scores weighted by the normalized effective
//! scores of their reviews.

use thiserror::Error;

/// Lowest admissible score.
pub const MIN_SCORE: f64 = 0.0;
/// Highest admissible score.
pub const MAX_SCORE: f64 = 100.0;
/// Fraction of scores dropped from each end before averaging.
pub const DEFAULT_TRIM_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("cannot average an empty score vector")]
    EmptyInput,
    #[error("score {0} is outside [0, 100]")]
    OutOfRange(f64),
    #[error("trim fraction {0} is outside [0, 0.5)")]
    BadTrimFraction(f64),
}

/// Checks that `value` is a finite score in `[0, 100]`.
pub fn check_score(value: f64) -> Result<f64, ScoringError> {
    if value.is_finite() && (MIN_SCORE..=MAX_SCORE).contains(&value) {
        Ok(value)
    } else {
        Err(ScoringError::OutOfRange(value))
    }
}

/// Reader scores of one review, each in `[0, 100]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ScoringError> {
        for &v in &values {
            check_score(v)?;
        }
        Ok(ScoreVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trimmed_mean(&self, trim_fraction: f64) -> Result<f64, ScoringError> {
        trimmed_mean(&self.0, trim_fraction)
    }
}

/// Entries dropped from each end of a sorted vector of length `n`.
pub fn trim_count(n: usize, trim_fraction: f64) -> usize {
    (trim_fraction * n as f64).floor() as usize
}

/// Sorts a copy, drops `floor(trim_fraction · n)` entries from each end, and
/// averages the rest in ascending order.
pub fn trimmed_mean(scores: &[f64], trim_fraction: f64) -> Result<f64, ScoringError> {
    if scores.is_empty() {
        return Err(ScoringError::EmptyInput);
    }
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(ScoringError::BadTrimFraction(trim_fraction));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let k = trim_count(sorted.len(), trim_fraction);
    let kept = &sorted[k..sorted.len() - k];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// W for a review: zero below `min_readers` scores, otherwise the trimmed mean.
pub fn effective_review_score(
    reader_scores: &[f64],
    min_readers: usize,
    trim_fraction: f64,
) -> f64 {
    if reader_scores.len() < min_readers || reader_scores.is_empty() {
        return 0.0;
    }
    trimmed_mean(reader_scores, trim_fraction).expect("non-empty scores with a validated trim")
}

/// `W̃_j = W_j / Σ W`. All-zero input yields all-zero weights.
pub fn normalize_weights(effective_scores: &[f64]) -> Vec<f64> {
    let total: f64 = effective_scores.iter().sum();
    if total <= 0.0 {
        return vec![0.0; effective_scores.len()];
    }
    effective_scores.iter().map(|w| w / total).collect()
}

/// One reviewer's score of a paper together with the effective score of the review.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedReview {
    pub z_score: f64,
    pub effective_score: f64,
}

/// `S = Σ W̃_j · Z_j`, or zero when no review carries weight.
///
/// The result is clamped to the range of positively weighted `Z` so that
/// floating-point rounding cannot push it outside the convex hull.
pub fn paper_score(reviews: &[WeightedReview]) -> f64 {
    let total: f64 = reviews.iter().map(|r| r.effective_score).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let weighted: f64 = reviews.iter().map(|r| r.effective_score * r.z_score).sum();
    let (lo, hi) = reviews
        .iter()
        .filter(|r| r.effective_score > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.z_score), hi.max(r.z_score))
        });
    (weighted / total).clamp(lo, hi)
}

/// Unweighted mean of the reviewers' scores; the comparison benchmark.
pub fn simple_average(z_scores: &[f64]) -> f64 {
    if z_scores.is_empty() {
        return 0.0;
    }
    z_scores.iter().sum::<f64>() / z_scores.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wr(z: f64, w: f64) -> WeightedReview {
        WeightedReview {
            z_score: z,
            effective_score: w,
        }
    }

    #[test]
    fn trimmed_mean_drops_one_from_each_end_of_ten() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(trimmed_mean(&v, 0.1).unwrap(), 5.5);
    }

    #[test]
    fn trimmed_mean_of_five_is_plain_mean() {
        assert_eq!(trim_count(5, 0.1), 0);
        assert_eq!(trimmed_mean(&[3.0, 1.0, 4.0, 1.0, 5.0], 0.1).unwrap(), 2.8);
    }

    #[test]
    fn trimmed_mean_of_constant_vector() {
        for n in [1, 7, 10, 33] {
            assert_eq!(trimmed_mean(&vec![62.5; n], 0.1).unwrap(), 62.5);
        }
    }

    #[test]
    fn trimmed_mean_errors() {
        assert_eq!(trimmed_mean(&[], 0.1), Err(ScoringError::EmptyInput));
        assert!(matches!(
            trimmed_mean(&[1.0], 0.5),
            Err(ScoringError::BadTrimFraction(_))
        ));
    }

    #[test]
    fn ten_percent_trim_count_is_exact_integer_division() {
        for n in 0..200_000usize {
            assert_eq!(trim_count(n, 0.1), n / 10, "n = {n}");
        }
    }

    #[test]
    fn effective_score_threshold() {
        let nine = vec![90.0; 9];
        assert_eq!(effective_review_score(&nine, 10, 0.1), 0.0);
        assert_eq!(effective_review_score(&[90.0; 10], 10, 0.1), 90.0);
        let tens: Vec<f64> = (1..=10).map(|k| f64::from(k) * 10.0).collect();
        assert_eq!(effective_review_score(&tens, 10, 0.1), 55.0);
        assert_eq!(effective_review_score(&[], 0, 0.1), 0.0);
    }

    #[test]
    fn weights_normalize() {
        assert_eq!(normalize_weights(&[2.0, 3.0, 5.0]), vec![0.2, 0.3, 0.5]);
        assert_eq!(normalize_weights(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(normalize_weights(&[7.0]), vec![1.0]);
    }

    #[test]
    fn paper_score_examples() {
        assert_eq!(paper_score(&[wr(40.0, 90.0)]), 40.0);
        assert_eq!(paper_score(&[wr(40.0, 50.0), wr(80.0, 50.0)]), 60.0);
        assert_eq!(paper_score(&[wr(40.0, 0.0), wr(80.0, 0.0)]), 0.0);
        assert_eq!(paper_score(&[]), 0.0);
    }

    #[test]
    fn score_vector_rejects_out_of_range() {
        assert!(ScoreVector::new(vec![0.0, 100.0]).is_ok());
        assert!(ScoreVector::new(vec![100.5]).is_err());
        assert!(ScoreVector::new(vec![f64::NAN]).is_err());
        assert!(check_score(-0.1).is_err());
    }
}
