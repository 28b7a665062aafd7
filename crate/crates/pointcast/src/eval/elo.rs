//! ELO rating baseline.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    pub initial_rating: f64,
    pub k_factor: f64,
    pub base: f64,
    pub scale: f64,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self {
            initial_rating: 1500.0,
            k_factor: 32.0,
            base: 10.0,
            scale: 400.0,
        }
    }
}

/// Expected score of `a` against `b`: `1 / (1 + base^((r_b - r_a)/scale))`.
pub fn elo_predict(r_a: f64, r_b: f64, cfg: &EloConfig) -> f64 {
    1.0 / (1.0 + cfg.base.powf((r_b - r_a) / cfg.scale))
}

/// Ratings after one game with score `score_a` (1 = a won). The update
/// conserves total rating.
pub fn elo_update(r_a: f64, r_b: f64, score_a: f64, cfg: &EloConfig) -> (f64, f64) {
    let expected = elo_predict(r_a, r_b, cfg);
    let delta = cfg.k_factor * (score_a - expected);
    (r_a + delta, r_b - delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_ratings_are_even_odds() {
        assert_eq!(elo_predict(1500.0, 1500.0, &EloConfig::default()), 0.5);
    }

    #[test]
    fn four_hundred_points_give_ten_to_one() {
        let p = elo_predict(1900.0, 1500.0, &EloConfig::default());
        assert!((p - 10.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn expectations_are_complementary() {
        let cfg = EloConfig::default();
        for (a, b) in [(1500.0, 1700.0), (1234.0, 1600.0), (2000.0, 1000.0)] {
            let sum = elo_predict(a, b, &cfg) + elo_predict(b, a, &cfg);
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_ratings_winner_gains_half_k() {
        let (ra, rb) = elo_update(1500.0, 1500.0, 1.0, &EloConfig::default());
        assert_eq!(ra, 1516.0);
        assert_eq!(rb, 1484.0);
    }

    #[test]
    fn score_matching_expectation_is_fixed_point() {
        let cfg = EloConfig::default();
        let expected = elo_predict(1600.0, 1450.0, &cfg);
        let (ra, rb) = elo_update(1600.0, 1450.0, expected, &cfg);
        assert_eq!(ra, 1600.0);
        assert_eq!(rb, 1450.0);
    }

    #[test]
    fn total_rating_conserved() {
        let cfg = EloConfig::default();
        let (ra, rb) = elo_update(1570.0, 1430.0, 0.0, &cfg);
        assert!((ra + rb - 3000.0).abs() < 1e-12);
    }
}
