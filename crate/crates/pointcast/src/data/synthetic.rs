//! Deterministic synthetic match generator.
//!
//! Each player carries a latent performance level that is piecewise constant
//! with planted level shifts; point outcomes are drawn from a logistic of the
//! latent difference, and the recorded indicators (serve results, break
//! points, distance, psychological factor) are sampled consistently with the
//! drawn outcome. The psychological factor embeds the latent directly with
//! unit-variance noise, so planted shifts are recoverable change points.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::{MatchPointRecord, PlayerSide, PlayerPointStats};

/// Baseline of the psychological-factor channel; keeps it positive so the
/// log-weighted momentum indicators behave monotonically.
pub(crate) const PSYCH_BASE: f64 = 5.0;
/// Noise standard deviation of the psychological-factor channel. Planted
/// shift magnitudes are expressed in these units.
pub(crate) const PSYCH_NOISE: f64 = 1.0;
/// Logistic gain mapping latent difference to point-win probability.
const OUTCOME_GAIN: f64 = 1.2;

/// Everything needed to synthesize one match.
#[derive(Debug, Clone)]
pub struct MatchPlan {
    pub match_id: String,
    pub player1: String,
    pub player2: String,
    pub n_points: usize,
    /// Planted level shifts `(point index, magnitude)` per player.
    pub jumps_p1: Vec<(usize, f64)>,
    pub jumps_p2: Vec<(usize, f64)>,
    /// Constant latent offsets before any shift applies.
    pub base_p1: f64,
    pub base_p2: f64,
    pub seed: u64,
}

impl MatchPlan {
    fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::Config("a match needs at least 2 points".into()));
        }
        for (idx, _) in self.jumps_p1.iter().chain(&self.jumps_p2) {
            if *idx >= self.n_points {
                return Err(Error::Config(format!(
                    "jump index {idx} outside match of {} points",
                    self.n_points
                )));
            }
        }
        Ok(())
    }
}

fn latent_at(base: f64, jumps: &[(usize, f64)], t: usize) -> f64 {
    base + jumps
        .iter()
        .filter(|(idx, _)| *idx <= t)
        .map(|(_, mag)| mag)
        .sum::<f64>()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Score {
    sets: [u32; 2],
    games: [u32; 2],
    points: [u32; 2],
    server: usize,
}

/// Synthesize the full record sequence for one planned match.
pub fn generate_match(plan: &MatchPlan) -> Result<Vec<MatchPointRecord>> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut score = Score {
        sets: [0, 0],
        games: [0, 0],
        points: [0, 0],
        server: 0,
    };
    let mut elapsed = 0.0;
    let mut records = Vec::with_capacity(plan.n_points);

    for t in 0..plan.n_points {
        elapsed += 25.0 + 20.0 * rng.random::<f64>();
        let latents = [
            latent_at(plan.base_p1, &plan.jumps_p1, t),
            latent_at(plan.base_p2, &plan.jumps_p2, t),
        ];
        let p1_wins = rng.random::<f64>() < sigmoid(OUTCOME_GAIN * (latents[0] - latents[1]));
        let winner = if p1_wins { 0 } else { 1 };
        let server = score.server;
        let returner = 1 - server;

        let mut stats = [PlayerPointStats::default(), PlayerPointStats::default()];

        // Serve annotations consistent with the drawn outcome.
        let ace_prob = (0.07 + 0.05 * (latents[server] / 2.0).tanh()).clamp(0.01, 0.4);
        let df_prob = (0.05 - 0.03 * (latents[server] / 2.0).tanh()).clamp(0.01, 0.4);
        if winner == server && rng.random::<f64>() < ace_prob {
            stats[server].ace = true;
        }
        if winner == returner && rng.random::<f64>() < df_prob {
            stats[server].double_fault = true;
        }

        // Break point: the returner stands one point from taking the game.
        if score.points[returner] == 3 {
            if winner == returner {
                stats[returner].break_pt_won = true;
            } else {
                stats[returner].break_pt_missed = true;
            }
        }

        for p in 0..2 {
            let noise: f64 = rng.sample(StandardNormal);
            stats[p].distance_run =
                (14.0 + 4.0 * noise + 0.8 * (latents[1 - p] - latents[p])).max(0.0);
            let psych_noise: f64 = rng.sample(StandardNormal);
            stats[p].psychological_factor =
                PSYCH_BASE + latents[p] + PSYCH_NOISE * psych_noise;
        }

        // Advance the score: first to four points takes the game, six games
        // take the set, server alternates each game.
        score.points[winner] += 1;
        if score.points[winner] >= 4 {
            score.points = [0, 0];
            score.games[winner] += 1;
            score.server = 1 - score.server;
            if score.games[winner] >= 6 {
                score.games = [0, 0];
                score.sets[winner] += 1;
            }
        }

        for p in 0..2 {
            stats[p].sets = score.sets[p];
            stats[p].games = score.games[p];
        }
        let [p1, p2] = stats;

        records.push(MatchPointRecord {
            match_id: plan.match_id.clone(),
            player1: plan.player1.clone(),
            player2: plan.player2.clone(),
            elapsed_seconds: elapsed,
            server: if server == 0 { PlayerSide::P1 } else { PlayerSide::P2 },
            point_victor: if winner == 0 { PlayerSide::P1 } else { PlayerSide::P2 },
            p1,
            p2,
        });
    }
    Ok(records)
}

/// Synthesize one match with shifts planted in player 1's latent signal.
///
/// Pure in `(seed, n_points, jump_spec)`: identical inputs give identical
/// records.
pub fn generate_synthetic_match(
    seed: u64,
    n_points: usize,
    jump_spec: &[(usize, f64)],
) -> Result<Vec<MatchPointRecord>> {
    generate_match(&MatchPlan {
        match_id: format!("synth-{seed}"),
        player1: "P1".into(),
        player2: "P2".into(),
        n_points,
        jumps_p1: jump_spec.to_vec(),
        jumps_p2: Vec::new(),
        base_p1: 0.0,
        base_p2: 0.0,
        seed,
    })
}

/// Parameters for a whole benchmark corpus.
#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub seed: u64,
    pub matches: usize,
    pub points_per_match: usize,
    /// Number of distinct players to rotate match pairings through.
    pub pool_size: usize,
    /// Inclusive range of planted shifts per player per match.
    pub shifts: (usize, usize),
    /// Magnitude range of each shift; signs alternate randomly.
    pub magnitude: (f64, f64),
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            matches: 40,
            points_per_match: 500,
            pool_size: 8,
            shifts: (1, 3),
            magnitude: (1.5, 2.5),
        }
    }
}

/// Name of the `i`th pool player, shared with ranking generation.
pub fn pool_player_name(i: usize) -> String {
    format!("player_{:02}", i + 1)
}

/// Generate a corpus of matches with planted momentum regime shifts.
pub fn generate_synthetic_corpus(cfg: &CorpusConfig) -> Result<Vec<Vec<MatchPointRecord>>> {
    if cfg.pool_size < 2 {
        return Err(Error::Config("player pool needs at least 2 players".into()));
    }
    if cfg.shifts.0 > cfg.shifts.1 || cfg.magnitude.0 > cfg.magnitude.1 {
        return Err(Error::Config("invalid shift or magnitude range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut corpus = Vec::with_capacity(cfg.matches);
    for m in 0..cfg.matches {
        let a = rng.random_range(0..cfg.pool_size);
        let b = (a + rng.random_range(1..cfg.pool_size)) % cfg.pool_size;
        let mut plan = MatchPlan {
            match_id: format!("m{m:03}"),
            player1: pool_player_name(a),
            player2: pool_player_name(b),
            n_points: cfg.points_per_match,
            jumps_p1: Vec::new(),
            jumps_p2: Vec::new(),
            base_p1: 0.4 * rng.sample::<f64, _>(StandardNormal),
            base_p2: 0.4 * rng.sample::<f64, _>(StandardNormal),
            seed: rng.random(),
        };
        let margin = cfg.points_per_match / 10;
        for side in 0..2 {
            let n_shifts = rng.random_range(cfg.shifts.0..=cfg.shifts.1);
            let mut jumps = Vec::with_capacity(n_shifts);
            for _ in 0..n_shifts {
                let idx = rng.random_range(margin..cfg.points_per_match - margin);
                let mag = rng.random_range(cfg.magnitude.0..=cfg.magnitude.1);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                jumps.push((idx, sign * mag));
            }
            jumps.sort_by_key(|(idx, _)| *idx);
            if side == 0 {
                plan.jumps_p1 = jumps;
            } else {
                plan.jumps_p2 = jumps;
            }
        }
        corpus.push(generate_match(&plan)?);
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::super::validate_match;
    use super::*;

    #[test]
    fn same_seed_gives_identical_matches() {
        let a = generate_synthetic_match(7, 120, &[(40, 2.0)]).unwrap();
        let b = generate_synthetic_match(7, 120, &[(40, 2.0)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seed_changes_output() {
        let a = generate_synthetic_match(7, 50, &[]).unwrap();
        let b = generate_synthetic_match(8, 50, &[]).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn empty_jump_spec_keeps_latent_flat() {
        let records = generate_synthetic_match(3, 300, &[]).unwrap();
        // With no shifts the psych channel is stationary around its base.
        let mean: f64 = records
            .iter()
            .map(|r| r.p1.psychological_factor)
            .sum::<f64>()
            / records.len() as f64;
        assert!((mean - PSYCH_BASE).abs() < 0.3, "mean {mean}");
    }

    #[test]
    fn planted_jump_shifts_psych_channel() {
        let records = generate_synthetic_match(11, 400, &[(200, 3.0)]).unwrap();
        let before: f64 = records[..200]
            .iter()
            .map(|r| r.p1.psychological_factor)
            .sum::<f64>()
            / 200.0;
        let after: f64 = records[200..]
            .iter()
            .map(|r| r.p1.psychological_factor)
            .sum::<f64>()
            / 200.0;
        assert!((after - before - 3.0).abs() < 0.4, "shift {}", after - before);
    }

    #[test]
    fn jump_index_out_of_range_rejected() {
        assert!(generate_synthetic_match(1, 100, &[(100, 1.0)]).is_err());
    }

    #[test]
    fn generated_matches_satisfy_record_invariants() {
        let records = generate_synthetic_match(5, 600, &[(150, -2.0), (350, 2.5)]).unwrap();
        validate_match(&records).unwrap();
        assert!(records.iter().all(|r| r.p1.distance_run >= 0.0));
    }

    #[test]
    fn corpus_is_deterministic_and_sized() {
        let cfg = CorpusConfig {
            matches: 4,
            points_per_match: 60,
            ..Default::default()
        };
        let a = generate_synthetic_corpus(&cfg).unwrap();
        let b = generate_synthetic_corpus(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|m| m.len() == 60));
        assert!(a.iter().all(|m| m[0].player1 != m[0].player2));
    }
}
