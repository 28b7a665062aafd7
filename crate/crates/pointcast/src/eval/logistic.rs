//! Logistic-regression baseline trained by full-batch gradient descent on
//! L2-regularized log-loss. Deterministic: zero init, fixed iteration order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 300,
            l2: 1e-4,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Probability of the positive class; `weights[0]` is the intercept.
pub fn logistic_predict(weights: &[f64], features: &[f64]) -> f64 {
    let z = weights[0]
        + weights[1..]
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum::<f64>();
    sigmoid(z)
}

/// Fit weights (intercept first) on binary labels. The intercept is not
/// regularized.
pub fn logistic_baseline_train(
    features: &[Vec<f64>],
    labels: &[bool],
    cfg: &LogisticConfig,
) -> Result<Vec<f64>> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::Shape {
            expected: format!("{} feature rows", labels.len()),
            got: format!("{}", features.len()),
        });
    }
    let dim = features[0].len();
    if features.iter().any(|row| row.len() != dim) {
        return Err(Error::Shape {
            expected: format!("rows of width {dim}"),
            got: "ragged feature matrix".into(),
        });
    }
    let n = features.len() as f64;
    let mut weights = vec![0.0; dim + 1];
    for epoch in 0..cfg.epochs {
        let mut grad = vec![0.0; dim + 1];
        let mut loss = 0.0;
        for (row, &label) in features.iter().zip(labels) {
            let p = logistic_predict(&weights, row);
            let y = label as u8 as f64;
            let err = p - y;
            grad[0] += err;
            for (g, x) in grad[1..].iter_mut().zip(row) {
                *g += err * x;
            }
            let clamped = p.clamp(1e-12, 1.0 - 1e-12);
            loss -= y * clamped.ln() + (1.0 - y) * (1.0 - clamped).ln();
        }
        loss /= n;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        weights[0] -= cfg.learning_rate * grad[0] / n;
        for (w, g) in weights[1..].iter_mut().zip(&grad[1..]) {
            *w -= cfg.learning_rate * (g / n + cfg.l2 * *w);
        }
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Divergence { epoch: cfg.epochs });
    }
    Ok(weights)
}
