//! Trend/seasonal split via adaptively weighted moving-average kernels.
//!
//! The trend is a softmax-weighted blend of centered moving averages with
//! replicate edge padding; the seasonal part is the exact remainder, so the
//! two components always sum back to the input.

use crate::error::{Error, Result};

/// Additive decomposition of one series.
#[derive(Debug, Clone)]
pub struct TrendSeasonal {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub kernel_sizes: Vec<usize>,
    /// Post-softmax kernel weights; positive, sum to 1.
    pub weights: Vec<f64>,
}

/// Numerically stable softmax.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Centered moving average of odd width `k`, replicate-padded at the edges.
pub(crate) fn moving_average(x: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    let half = (k / 2) as isize;
    (0..n as isize)
        .map(|t| {
            let mut sum = 0.0;
            for offset in -half..=half {
                let idx = (t + offset).clamp(0, n as isize - 1) as usize;
                sum += x[idx];
            }
            sum / k as f64
        })
        .collect()
}

pub(crate) fn validate_kernels(kernel_sizes: &[usize], len: usize) -> Result<()> {
    if kernel_sizes.is_empty() {
        return Err(Error::Config("at least one kernel size required".into()));
    }
    for &k in kernel_sizes {
        if k % 2 == 0 {
            return Err(Error::Config(format!("kernel size {k} must be odd")));
        }
        if k < 3 {
            return Err(Error::Config(format!("kernel size {k} must be >= 3")));
        }
        if k > len {
            return Err(Error::Config(format!(
                "kernel size {k} exceeds series length {len}"
            )));
        }
    }
    Ok(())
}

/// Split `series` into trend and seasonal components.
pub fn decompose(
    series: &[f64],
    kernel_sizes: &[usize],
    weight_logits: &[f64],
) -> Result<TrendSeasonal> {
    validate_kernels(kernel_sizes, series.len())?;
    if weight_logits.len() != kernel_sizes.len() {
        return Err(Error::Shape {
            expected: format!("{} weight logits", kernel_sizes.len()),
            got: format!("{}", weight_logits.len()),
        });
    }
    let weights = softmax(weight_logits);
    let mut trend = vec![0.0; series.len()];
    for (&k, &w) in kernel_sizes.iter().zip(&weights) {
        let ma = moving_average(series, k);
        for (t, v) in ma.into_iter().enumerate() {
            trend[t] += w * v;
        }
    }
    let seasonal: Vec<f64> = series.iter().zip(&trend).map(|(x, t)| x - t).collect();
    Ok(TrendSeasonal {
        trend,
        seasonal,
        kernel_sizes: kernel_sizes.to_vec(),
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_series_is_all_trend() {
        let out = decompose(&[4.2; 50], &[5, 13], &[0.3, -0.7]).unwrap();
        for t in 0..50 {
            assert!((out.trend[t] - 4.2).abs() < 1e-12);
            assert!(out.seasonal[t].abs() < 1e-12);
        }
    }

    #[test]
    fn single_kernel_is_plain_moving_average() {
        let x: Vec<f64> = (0..30).map(|t| (t as f64 * 0.7).sin()).collect();
        let out = decompose(&x, &[7], &[123.0]).unwrap();
        assert_eq!(out.weights, vec![1.0]);
        let ma = moving_average(&x, 7);
        assert_eq!(out.trend, ma);
    }

    #[test]
    fn ramp_interior_reproduced_exactly() {
        // A centered moving average reproduces affine signals away from the
        // replicated edges.
        let x: Vec<f64> = (0..40).map(|t| 1.5 * t as f64 - 3.0).collect();
        let out = decompose(&x, &[3, 5], &[0.0, 0.0]).unwrap();
        for t in 2..38 {
            assert!((out.trend[t] - x[t]).abs() < 1e-10, "t={t}");
            assert!(out.seasonal[t].abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn additivity_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-50.0..50.0)).collect();
        let out = decompose(&x, &[5, 13, 25], &[0.4, -1.0, 2.0]).unwrap();
        for t in 0..x.len() {
            assert!((out.trend[t] + out.seasonal[t] - x[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_weights_normalized_and_shift_invariant() {
        let a = softmax(&[0.1, -2.0, 3.0]);
        let b = softmax(&[100.1, 98.0, 103.0]);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(a.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn linear_in_input_for_fixed_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scaled: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let a = decompose(&x, &[5, 9], &[1.0, 0.5]).unwrap();
        let b = decompose(&scaled, &[5, 9], &[1.0, 0.5]).unwrap();
        for t in 0..60 {
            assert!((b.trend[t] - 3.0 * a.trend[t]).abs() < 1e-10);
            assert!((b.seasonal[t] - 3.0 * a.seasonal[t]).abs() < 1e-10);
        }
    }

    #[test]
    fn even_kernel_rejected() {
        assert!(decompose(&[0.0; 20], &[4], &[0.0]).is_err());
    }

    #[test]
    fn oversized_kernel_rejected() {
        assert!(decompose(&[0.0; 10], &[11], &[0.0]).is_err());
    }

    #[test]
    fn logit_count_mismatch_rejected() {
        assert!(decompose(&[0.0; 20], &[3, 5], &[0.0]).is_err());
    }
}
