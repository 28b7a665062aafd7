//! Reversible instance normalization.
//!
//! Windows are standardized by their own mean and standard deviation, passed
//! through a learnable affine map, and the prediction is mapped back with
//! the stored statistics, so the model sees stationary inputs while outputs
//! keep the original scale.

use serde::{Deserialize, Serialize};

/// Guard for (near-)constant windows.
pub const REVIN_EPS: f64 = 1e-5;

/// Learnable affine parameters (scalar series: one scale, one shift).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevinParams {
    pub scale: f64,
    pub shift: f64,
}

impl Default for RevinParams {
    fn default() -> Self {
        Self {
            scale: 1.0,
            shift: 0.0,
        }
    }
}

/// Per-window statistics captured during normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevinState {
    pub mean: f64,
    /// Raw population standard deviation, before the epsilon guard.
    pub std: f64,
}

impl RevinState {
    pub fn guarded_std(&self) -> f64 {
        self.std.max(REVIN_EPS)
    }
}

/// Normalize a window: `(x - mean) / max(std, eps) * scale + shift`.
pub fn revin_norm(x: &[f64], params: &RevinParams) -> (Vec<f64>, RevinState) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let state = RevinState {
        mean,
        std: var.sqrt(),
    };
    let denom = state.guarded_std();
    let out = x
        .iter()
        .map(|v| (v - mean) / denom * params.scale + params.shift)
        .collect();
    (out, state)
}

/// Invert [`revin_norm`] for a single predicted value.
pub fn revin_denorm_scalar(y: f64, params: &RevinParams, state: &RevinState) -> f64 {
    (y - params.shift) / params.scale * state.guarded_std() + state.mean
}

/// Invert [`revin_norm`] element-wise.
pub fn revin_denorm(y: &[f64], params: &RevinParams, state: &RevinState) -> Vec<f64> {
    y.iter()
        .map(|&v| revin_denorm_scalar(v, params, state))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_affine_standardizes() {
        let (z, _) = revin_norm(&[1.0, 2.0, 3.0], &RevinParams::default());
        let mean: f64 = z.iter().sum::<f64>() / 3.0;
        let var: f64 = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-9);
        assert!((var.sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_window_maps_to_shift() {
        let params = RevinParams {
            scale: 2.0,
            shift: 0.7,
        };
        let (z, state) = revin_norm(&[4.0; 8], &params);
        assert!(z.iter().all(|&v| (v - 0.7).abs() < 1e-12));
        assert_eq!(state.std, 0.0);
        assert!(z.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn denorm_inverts_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = RevinParams {
            scale: 1.3,
            shift: -0.2,
        };
        let x: Vec<f64> = (0..32).map(|_| rng.random_range(-5.0..5.0)).collect();
        let (z, state) = revin_norm(&x, &params);
        let back = revin_denorm(&z, &params, &state);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
