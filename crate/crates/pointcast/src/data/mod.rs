//! Point-by-point match records and per-player multivariate series.
//!
//! A match is a sequence of [`MatchPointRecord`]s sharing one `match_id`.
//! Each record carries both players' Table-style indicators; [`to_series`]
//! projects one player's view into a validated `T x D` real matrix whose
//! columns follow a [`FeatureSchema`].

mod csv_io;
mod synthetic;

pub use csv_io::{ingest_csv, read_records, write_csv, write_records};
pub use synthetic::{
    generate_match, generate_synthetic_corpus, generate_synthetic_match, pool_player_name,
    CorpusConfig, MatchPlan,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two players in a match a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlayerSide {
    P1,
    P2,
}

impl PlayerSide {
    pub fn other(self) -> Self {
        match self {
            PlayerSide::P1 => PlayerSide::P2,
            PlayerSide::P2 => PlayerSide::P1,
        }
    }

    pub fn csv_code(self) -> &'static str {
        match self {
            PlayerSide::P1 => "1",
            PlayerSide::P2 => "2",
        }
    }

    pub fn from_csv_code(code: &str) -> Option<Self> {
        match code.trim() {
            "1" => Some(PlayerSide::P1),
            "2" => Some(PlayerSide::P2),
            _ => None,
        }
    }
}

/// One player's recorded indicators for a single point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlayerPointStats {
    /// Sets won so far.
    pub sets: u32,
    /// Games won in the current set.
    pub games: u32,
    pub ace: bool,
    pub double_fault: bool,
    pub break_pt_missed: bool,
    pub break_pt_won: bool,
    /// Distance run during the point, meters.
    pub distance_run: f64,
    /// Opaque psychological indicator; read as-is, 0 when absent.
    pub psychological_factor: f64,
}

/// One row of a match file: the state of both players at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchPointRecord {
    pub match_id: String,
    pub player1: String,
    pub player2: String,
    /// Seconds since the start of the match, strictly increasing.
    pub elapsed_seconds: f64,
    pub server: PlayerSide,
    pub point_victor: PlayerSide,
    pub p1: PlayerPointStats,
    pub p2: PlayerPointStats,
}

impl MatchPointRecord {
    pub fn stats(&self, side: PlayerSide) -> &PlayerPointStats {
        match side {
            PlayerSide::P1 => &self.p1,
            PlayerSide::P2 => &self.p2,
        }
    }

    pub fn player_name(&self, side: PlayerSide) -> &str {
        match side {
            PlayerSide::P1 => &self.player1,
            PlayerSide::P2 => &self.player2,
        }
    }

    fn validate(&self, row: usize) -> Result<()> {
        if self.p1.distance_run < 0.0 || self.p2.distance_run < 0.0 {
            return Err(Error::Invariant(format!(
                "row {row}: negative distance_run"
            )));
        }
        for v in [
            self.elapsed_seconds,
            self.p1.distance_run,
            self.p2.distance_run,
            self.p1.psychological_factor,
            self.p2.psychological_factor,
        ] {
            if !v.is_finite() {
                return Err(Error::Invariant(format!("row {row}: non-finite value")));
            }
        }
        Ok(())
    }
}

/// How a schema feature is stored in the records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Recorded separately for each player (`_p1` / `_p2` columns).
    PerPlayer,
    /// Shared `server` column, encoded per player as a 0/1 serving flag.
    ServerIndicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

/// Ordered list of the momentum features extracted per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
}

/// Base names of the per-player record fields a schema may reference.
const PER_PLAYER_FIELDS: [&str; 8] = [
    "p_sets",
    "p_games",
    "p_ace",
    "p_double_fault",
    "p_break_pt_missed",
    "p_break_pt_won",
    "p_distance_run",
    "psychological_factor",
];

impl FeatureSchema {
    /// The full nine-feature schema: eight per-player indicators plus the
    /// serving flag, eighteen momentum columns across both players.
    pub fn standard() -> Self {
        let mut features: Vec<FeatureSpec> = PER_PLAYER_FIELDS
            .iter()
            .map(|name| FeatureSpec {
                name: (*name).to_string(),
                kind: FeatureKind::PerPlayer,
            })
            .collect();
        features.insert(
            2,
            FeatureSpec {
                name: "server".to_string(),
                kind: FeatureKind::ServerIndicator,
            },
        );
        Self { features }
    }

    /// A schema over a subset of the known feature names.
    pub fn from_names(names: &[&str]) -> Result<Self> {
        let features = names
            .iter()
            .map(|name| {
                if *name == "server" {
                    Ok(FeatureSpec {
                        name: (*name).to_string(),
                        kind: FeatureKind::ServerIndicator,
                    })
                } else if PER_PLAYER_FIELDS.contains(name) {
                    Ok(FeatureSpec {
                        name: (*name).to_string(),
                        kind: FeatureKind::PerPlayer,
                    })
                } else {
                    Err(Error::Config(format!("unknown feature name `{name}`")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if features.is_empty() {
            return Err(Error::Config("schema needs at least one feature".into()));
        }
        Ok(Self { features })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    /// Number of momentum features per player.
    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Value of one schema feature for one player at one point.
    pub fn record_value(&self, spec: &FeatureSpec, record: &MatchPointRecord, side: PlayerSide) -> f64 {
        match spec.kind {
            FeatureKind::ServerIndicator => {
                if record.server == side {
                    1.0
                } else {
                    0.0
                }
            }
            FeatureKind::PerPlayer => {
                let stats = record.stats(side);
                match spec.name.as_str() {
                    "p_sets" => stats.sets as f64,
                    "p_games" => stats.games as f64,
                    "p_ace" => stats.ace as u8 as f64,
                    "p_double_fault" => stats.double_fault as u8 as f64,
                    "p_break_pt_missed" => stats.break_pt_missed as u8 as f64,
                    "p_break_pt_won" => stats.break_pt_won as u8 as f64,
                    "p_distance_run" => stats.distance_run,
                    "psychological_factor" => stats.psychological_factor,
                    other => unreachable!("schema validated at construction: {other}"),
                }
            }
        }
    }
}

/// A validated `T x D` real matrix with a strictly increasing time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    values: Vec<Vec<f64>>,
    time_index: Vec<f64>,
    variable_names: Vec<String>,
}

impl MultivariateSeries {
    pub fn new(
        values: Vec<Vec<f64>>,
        time_index: Vec<f64>,
        variable_names: Vec<String>,
    ) -> Result<Self> {
        let t = values.len();
        if t < 2 {
            return Err(Error::Invariant(format!(
                "series needs at least 2 time points, got {t}"
            )));
        }
        let d = values[0].len();
        if d < 1 {
            return Err(Error::Invariant("series needs at least 1 variable".into()));
        }
        if variable_names.len() != d {
            return Err(Error::Shape {
                expected: format!("{d} variable names"),
                got: format!("{}", variable_names.len()),
            });
        }
        if time_index.len() != t {
            return Err(Error::Shape {
                expected: format!("time index of length {t}"),
                got: format!("{}", time_index.len()),
            });
        }
        for (row_idx, row) in values.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape {
                    expected: format!("row of width {d}"),
                    got: format!("width {} at row {row_idx}", row.len()),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invariant(format!(
                    "non-finite value at row {row_idx}"
                )));
            }
        }
        for w in time_index.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Invariant(format!(
                    "time index not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            values,
            time_index,
            variable_names,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn width(&self) -> usize {
        self.values[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t]
    }

    pub fn column(&self, d: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[d]).collect()
    }

    pub fn time_index(&self) -> &[f64] {
        &self.time_index
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }
}

/// Project one player's feature series out of a single match's records.
pub fn to_series(
    records: &[MatchPointRecord],
    player: PlayerSide,
    schema: &FeatureSchema,
) -> Result<MultivariateSeries> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to build a series from".into()));
    }
    let match_id = &records[0].match_id;
    if let Some(bad) = records.iter().find(|r| &r.match_id != match_id) {
        return Err(Error::Invariant(format!(
            "records mix match ids `{match_id}` and `{}`",
            bad.match_id
        )));
    }
    let values: Vec<Vec<f64>> = records
        .iter()
        .map(|record| {
            schema
                .features
                .iter()
                .map(|spec| schema.record_value(spec, record, player))
                .collect()
        })
        .collect();
    let time_index: Vec<f64> = records.iter().map(|r| r.elapsed_seconds).collect();
    MultivariateSeries::new(values, time_index, schema.feature_names())
}

/// Check the cross-record invariants of one match: counters never decrease
/// (games may reset when a set completes) and the clock moves forward.
pub fn validate_match(records: &[MatchPointRecord]) -> Result<()> {
    for (row, pair) in records.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        if next.elapsed_seconds <= prev.elapsed_seconds {
            return Err(Error::Invariant(format!(
                "row {}: elapsed_time not strictly increasing",
                row + 1
            )));
        }
        for side in [PlayerSide::P1, PlayerSide::P2] {
            let (p, n) = (prev.stats(side), next.stats(side));
            if n.sets < p.sets {
                return Err(Error::Invariant(format!(
                    "row {}: sets counter decreased",
                    row + 1
                )));
            }
            let set_completed = next.p1.sets > prev.p1.sets || next.p2.sets > prev.p2.sets;
            if n.games < p.games && !set_completed {
                return Err(Error::Invariant(format!(
                    "row {}: games counter decreased mid-set",
                    row + 1
                )));
            }
        }
    }
    Ok(())
}

/// Group a flat record list into matches, preserving first-seen order.
pub fn group_by_match(records: Vec<MatchPointRecord>) -> Vec<Vec<MatchPointRecord>> {
    let mut order: Vec<String> = Vec::new();
    let mut buckets: std::collections::HashMap<String, Vec<MatchPointRecord>> =
        std::collections::HashMap::new();
    for record in records {
        if !buckets.contains_key(&record.match_id) {
            order.push(record.match_id.clone());
        }
        buckets.entry(record.match_id.clone()).or_default().push(record);
    }
    order
        .into_iter()
        .map(|id| buckets.remove(&id).unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_record(t: f64, match_id: &str) -> MatchPointRecord {
        MatchPointRecord {
            match_id: match_id.to_string(),
            player1: "A".into(),
            player2: "B".into(),
            elapsed_seconds: t,
            server: PlayerSide::P1,
            point_victor: PlayerSide::P2,
            p1: PlayerPointStats {
                distance_run: 10.0,
                psychological_factor: 5.0,
                ..Default::default()
            },
            p2: PlayerPointStats {
                distance_run: 12.0,
                psychological_factor: 5.0,
                ..Default::default()
            },
        }
    }

    #[test]
    fn standard_schema_has_nine_features_eighteen_columns() {
        let schema = FeatureSchema::standard();
        assert_eq!(schema.feature_count(), 9);
        // Two players' copies of every feature: the 18 retained columns.
        assert_eq!(schema.feature_count() * 2, 18);
    }

    #[test]
    fn to_series_shape_contract() {
        let schema = FeatureSchema::from_names(&["p_sets", "p_games", "p_ace"]).unwrap();
        let records = vec![sample_record(1.0, "m"), sample_record(2.0, "m")];
        let series = to_series(&records, PlayerSide::P1, &schema).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series.width(), 3);
        assert_eq!(series.variable_names(), ["p_sets", "p_games", "p_ace"]);
    }

    #[test]
    fn ace_indicator_encoding() {
        let schema = FeatureSchema::from_names(&["p_ace"]).unwrap();
        let mut records = vec![
            sample_record(1.0, "m"),
            sample_record(2.0, "m"),
            sample_record(3.0, "m"),
        ];
        records[1].p1.ace = true;
        let series = to_series(&records, PlayerSide::P1, &schema).unwrap();
        assert_eq!(series.column(0), vec![0.0, 1.0, 0.0]);
        let opp = to_series(&records, PlayerSide::P2, &schema).unwrap();
        assert_eq!(opp.column(0), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn server_indicator_is_per_player_complementary() {
        let schema = FeatureSchema::from_names(&["server"]).unwrap();
        let mut records = vec![sample_record(1.0, "m"), sample_record(2.0, "m")];
        records[1].server = PlayerSide::P2;
        let p1 = to_series(&records, PlayerSide::P1, &schema).unwrap();
        let p2 = to_series(&records, PlayerSide::P2, &schema).unwrap();
        assert_eq!(p1.column(0), vec![1.0, 0.0]);
        assert_eq!(p2.column(0), vec![0.0, 1.0]);
    }

    #[test]
    fn non_monotone_time_rejected() {
        let schema = FeatureSchema::standard();
        let records = vec![sample_record(2.0, "m"), sample_record(2.0, "m")];
        assert!(matches!(
            to_series(&records, PlayerSide::P1, &schema),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn empty_records_rejected() {
        let schema = FeatureSchema::standard();
        assert!(matches!(
            to_series(&[], PlayerSide::P1, &schema),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn mixed_match_ids_rejected() {
        let schema = FeatureSchema::standard();
        let records = vec![sample_record(1.0, "a"), sample_record(2.0, "b")];
        assert!(to_series(&records, PlayerSide::P1, &schema).is_err());
    }

    #[test]
    fn both_players_share_time_axis() {
        let schema = FeatureSchema::standard();
        let records = vec![sample_record(1.0, "m"), sample_record(5.0, "m")];
        let a = to_series(&records, PlayerSide::P1, &schema).unwrap();
        let b = to_series(&records, PlayerSide::P2, &schema).unwrap();
        assert_eq!(a.time_index(), b.time_index());
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn games_reset_allowed_only_on_set_boundary() {
        let mut records = vec![sample_record(1.0, "m"), sample_record(2.0, "m")];
        records[0].p1.games = 5;
        records[1].p1.games = 0;
        assert!(validate_match(&records).is_err());
        records[1].p1.sets = 1;
        assert!(validate_match(&records).is_ok());
    }

    #[test]
    fn unknown_schema_name_rejected() {
        assert!(FeatureSchema::from_names(&["p_rally_length"]).is_err());
    }
}
