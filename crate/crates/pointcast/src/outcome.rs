//! Winner determination from forecast momentum, with ranking tiebreak.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::data::{MatchPointRecord, PlayerSide};
use crate::error::{Error, Result};
use crate::forecast::{padded_window, ForecastModel};
use crate::pipeline::MomentumPipeline;

/// Historical rankings, 1 = best. Lookups for unknown players fail.
#[derive(Debug, Clone, Default)]
pub struct RankingTable {
    ranks: HashMap<String, u32>,
}

impl RankingTable {
    pub fn new(entries: impl IntoIterator<Item = (String, u32)>) -> Result<Self> {
        let mut ranks = HashMap::new();
        for (player, rank) in entries {
            if rank == 0 {
                return Err(Error::Invariant(format!(
                    "rank for `{player}` must be positive"
                )));
            }
            ranks.insert(player, rank);
        }
        Ok(Self { ranks })
    }

    /// Parse a two-column `player,rank` CSV with header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = Vec::new();
        for (i, row) in csv_reader.records().enumerate() {
            let row = row?;
            let player = row
                .get(0)
                .ok_or_else(|| Error::EmptyInput("missing player cell".into()))?
                .to_string();
            let rank_raw = row.get(1).unwrap_or_default();
            let rank: u32 = rank_raw.parse().map_err(|_| Error::Parse {
                row: i + 1,
                column: "rank".into(),
                value: rank_raw.to_string(),
                reason: "expected a positive integer".into(),
            })?;
            entries.push((player, rank));
        }
        Self::new(entries)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv(File::open(path.as_ref())?)
    }

    pub fn get(&self, player: &str) -> Result<u32> {
        self.ranks
            .get(player)
            .copied()
            .ok_or_else(|| Error::UnknownPlayer(player.to_string()))
    }
}

/// Outcome of one momentum comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDecision {
    pub winner: String,
    /// `P_i - P_j` as passed in.
    pub margin: f64,
    pub tiebreak_used: bool,
}

/// Pick the winner: larger forecast momentum, rankings breaking exact ties.
///
/// Ties where neither player has a usable (or distinct) ranking are an
/// error rather than a guess.
pub fn decide(
    p_i: f64,
    p_j: f64,
    i: &str,
    j: &str,
    ranks: &RankingTable,
) -> Result<OutcomeDecision> {
    if !p_i.is_finite() || !p_j.is_finite() {
        return Err(Error::Invariant("non-finite momentum forecast".into()));
    }
    let margin = p_i - p_j;
    if p_i > p_j {
        return Ok(OutcomeDecision {
            winner: i.to_string(),
            margin,
            tiebreak_used: false,
        });
    }
    if p_i < p_j {
        return Ok(OutcomeDecision {
            winner: j.to_string(),
            margin,
            tiebreak_used: false,
        });
    }
    let winner = match (ranks.get(i), ranks.get(j)) {
        (Ok(ri), Ok(rj)) if ri < rj => i,
        (Ok(ri), Ok(rj)) if rj < ri => j,
        (Ok(_), Err(_)) => i,
        (Err(_), Ok(_)) => j,
        _ => return Err(Error::UnresolvedTie(i.to_string(), j.to_string())),
    };
    Ok(OutcomeDecision {
        winner: winner.to_string(),
        margin,
        tiebreak_used: true,
    })
}

/// One row of the per-point decision log.
#[derive(Debug, Clone, Serialize)]
pub struct PointDecision {
    /// Index of the predicted point.
    pub t: usize,
    pub p_i: f64,
    pub p_j: f64,
    pub winner: String,
    pub tiebreak_used: bool,
}

/// Whole-match simulation output.
#[derive(Debug, Clone)]
pub struct MatchSimulation {
    pub decisions: Vec<PointDecision>,
    pub match_winner: String,
    pub player1: String,
    pub player2: String,
}

impl MatchSimulation {
    /// Decision log as CSV: `t, P_i, P_j, winner, tiebreak_used`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,p_i,p_j,winner,tiebreak_used")?;
        for d in &self.decisions {
            writeln!(
                out,
                "{},{},{},{},{}",
                d.t, d.p_i, d.p_j, d.winner, d.tiebreak_used
            )?;
        }
        Ok(())
    }
}

/// Roll the forecaster across a match: each point from the second onward is
/// predicted from both players' momentum histories (windows left-padded
/// during warm-up), and the match winner is the predicted-point majority
/// with the ranking tiebreak on an exact split.
pub fn simulate_match(
    model: &ForecastModel,
    records: &[MatchPointRecord],
    pipeline: &MomentumPipeline,
    ranks: &RankingTable,
) -> Result<MatchSimulation> {
    let (mi, mj) = pipeline.momentum_pair(records)?;
    let player1 = records[0].player1.clone();
    let player2 = records[0].player2.clone();
    let window = model.config.window;

    let mut decisions = Vec::with_capacity(records.len().saturating_sub(1));
    let mut wins = [0usize, 0usize];
    for t in 1..records.len() {
        let wi = padded_window(&mi.values, t - 1, window);
        let wj = padded_window(&mj.values, t - 1, window);
        let p_i = model.forecast_next(&wi)?;
        let p_j = model.forecast_next(&wj)?;
        let decision = decide(p_i, p_j, &player1, &player2, ranks)?;
        if decision.winner == player1 {
            wins[0] += 1;
        } else {
            wins[1] += 1;
        }
        decisions.push(PointDecision {
            t,
            p_i,
            p_j,
            winner: decision.winner,
            tiebreak_used: decision.tiebreak_used,
        });
    }
    let match_winner = if wins[0] > wins[1] {
        player1.clone()
    } else if wins[1] > wins[0] {
        player2.clone()
    } else {
        decide(0.0, 0.0, &player1, &player2, ranks)?.winner
    };
    Ok(MatchSimulation {
        decisions,
        match_winner,
        player1,
        player2,
    })
}

/// Actual point victor of record `t`, as a name.
pub fn actual_victor(record: &MatchPointRecord) -> &str {
    match record.point_victor {
        PlayerSide::P1 => &record.player1,
        PlayerSide::P2 => &record.player2,
    }
}
