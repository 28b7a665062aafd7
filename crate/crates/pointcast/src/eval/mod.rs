//! Evaluation: regression and classification metrics, baseline models, and
//! the repeated random-split benchmark protocol.

mod benchmark;
mod elo;
mod logistic;
mod models;

pub use benchmark::{benchmark, BenchmarkConfig, BenchmarkEntry, MatchData, ModelReport,
    PointPrediction, PointPredictor};
pub use elo::{elo_predict, elo_update, EloConfig};
pub use logistic::{logistic_baseline_train, logistic_predict, LogisticConfig};
pub use models::{standard_entries, EloPredictor, LogisticPredictor, MomentumPredictor};

use serde::Serialize;

use crate::error::{Error, Result};

/// Confusion-matrix tallies for a binary task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn count<T: PartialEq>(pred: &[T], truth: &[T], positive: &T) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Shape {
                expected: format!("{} predictions", truth.len()),
                got: format!("{}", pred.len()),
            });
        }
        let mut counts = ConfusionCounts {
            true_pos: 0,
            false_pos: 0,
            true_neg: 0,
            false_neg: 0,
        };
        for (p, t) in pred.iter().zip(truth) {
            match (p == positive, t == positive) {
                (true, true) => counts.true_pos += 1,
                (true, false) => counts.false_pos += 1,
                (false, false) => counts.true_neg += 1,
                (false, true) => counts.false_neg += 1,
            }
        }
        Ok(counts)
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Accuracy, precision, recall, F1 from confusion counts. Zero denominators
/// yield 0 with the `degenerate` flag set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

impl ClassificationMetrics {
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let total = c.total();
        let accuracy = if total == 0 {
            0.0
        } else {
            (c.true_pos + c.true_neg) as f64 / total as f64
        };
        let mut degenerate = total == 0;
        let precision = if c.true_pos + c.false_pos == 0 {
            degenerate = true;
            0.0
        } else {
            c.true_pos as f64 / (c.true_pos + c.false_pos) as f64
        };
        let recall = if c.true_pos + c.false_neg == 0 {
            degenerate = true;
            0.0
        } else {
            c.true_pos as f64 / (c.true_pos + c.false_neg) as f64
        };
        let f1 = if precision + recall == 0.0 {
            degenerate = true;
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassificationMetrics {
            accuracy,
            precision,
            recall,
            f1,
            degenerate,
        }
    }
}

/// Classification metrics of a prediction vector against the truth.
pub fn classification_metrics<T: PartialEq>(
    pred: &[T],
    truth: &[T],
    positive: &T,
) -> Result<ClassificationMetrics> {
    Ok(ClassificationMetrics::from_counts(&ConfusionCounts::count(
        pred, truth, positive,
    )?))
}

/// Mean squared and mean absolute error.
pub fn regression_metrics(pred: &[f64], truth: &[f64]) -> Result<(f64, f64)> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Shape {
            expected: format!("matching non-empty vectors ({} truth)", truth.len()),
            got: format!("{}", pred.len()),
        });
    }
    let n = pred.len() as f64;
    let mse = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n;
    let mae = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / n;
    Ok((mse, mae))
}

/// Aggregated evaluation result for one model.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub mae: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub f1: f64,
    pub samples: usize,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let pred = [true, false, true];
        let m = classification_metrics(&pred, &pred, &true).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.f1, 1.0);
        assert!(!m.degenerate);
    }

    #[test]
    fn hand_counted_confusion_matrix() {
        // TP=3, FP=1, FN=2, TN=4.
        let truth = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
        let pred = [1, 1, 1, 0, 0, 1, 0, 0, 0, 0];
        let c = ConfusionCounts::count(&pred, &truth, &1).unwrap();
        assert_eq!((c.true_pos, c.false_pos, c.false_neg, c.true_neg), (3, 1, 2, 4));
        let m = ClassificationMetrics::from_counts(&c);
        assert!((m.precision - 0.75).abs() < 1e-12);
        assert!((m.recall - 0.6).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.accuracy - 0.7).abs() < 1e-12);
    }

    #[test]
    fn all_negative_predictions_flag_degenerate() {
        let truth = [true, false, true];
        let pred = [false, false, false];
        let m = classification_metrics(&pred, &truth, &true).unwrap();
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.f1, 0.0);
        assert!(m.degenerate);
    }

    #[test]
    fn regression_hand_values() {
        let (mse, mae) = regression_metrics(&[0.0, 0.0], &[1.0, 3.0]).unwrap();
        assert_eq!(mse, 5.0);
        assert_eq!(mae, 2.0);
    }

    #[test]
    fn identical_vectors_give_zero_errors() {
        let v = [1.0, -2.0, 0.5];
        assert_eq!(regression_metrics(&v, &v).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn mae_bounded_by_root_mse() {
        let pred = [0.1, 2.0, -1.0, 0.0];
        let truth = [0.0, 1.0, 1.0, 4.0];
        let (mse, mae) = regression_metrics(&pred, &truth).unwrap();
        assert!(mae <= mse.sqrt() + 1e-12);
    }

    #[test]
    fn metrics_permutation_invariant() {
        let pred = [1, 0, 1, 1, 0, 0];
        let truth = [1, 1, 0, 1, 0, 1];
        let a = classification_metrics(&pred, &truth, &1).unwrap();
        let perm = [5usize, 2, 0, 4, 1, 3];
        let pred_p: Vec<i32> = perm.iter().map(|&i| pred[i]).collect();
        let truth_p: Vec<i32> = perm.iter().map(|&i| truth[i]).collect();
        let b = classification_metrics(&pred_p, &truth_p, &1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(regression_metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert!(classification_metrics(&[1], &[1, 2], &1).is_err());
    }
}
