//! CSV ingestion and emission for match point records.
//!
//! One row per point, header required. Two-player fields carry `_p1`/`_p2`
//! suffixes; matches are delimited by the `match_id` column. `elapsed_time`
//! accepts either `H:MM:SS` or plain seconds. Missing cells are a hard
//! error — nothing is imputed.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{
    group_by_match, validate_match, FeatureKind, FeatureSchema, MatchPointRecord, PlayerSide,
    PlayerPointStats,
};

const META_COLUMNS: [&str; 6] = [
    "match_id",
    "player1",
    "player2",
    "elapsed_time",
    "server",
    "point_victor",
];

const PER_PLAYER_COLUMNS: [&str; 8] = [
    "p_sets",
    "p_games",
    "p_ace",
    "p_double_fault",
    "p_break_pt_missed",
    "p_break_pt_won",
    "p_distance_run",
    "psychological_factor",
];

/// Parse `H:MM:SS` or plain numeric seconds.
pub fn parse_elapsed(value: &str) -> Option<f64> {
    let trimmed = value.trim();
    let parts: Vec<&str> = trimmed.split(':').collect();
    match parts.len() {
        1 => trimmed.parse::<f64>().ok(),
        3 => {
            let h: f64 = parts[0].trim().parse().ok()?;
            let m: f64 = parts[1].trim().parse().ok()?;
            let s: f64 = parts[2].trim().parse().ok()?;
            Some(h * 3600.0 + m * 60.0 + s)
        }
        _ => None,
    }
}

struct HeaderIndex {
    by_name: HashMap<String, usize>,
}

impl HeaderIndex {
    fn new(headers: &csv::StringRecord) -> Self {
        let by_name = headers
            .iter()
            .enumerate()
            .map(|(i, name)| (name.trim().to_string(), i))
            .collect();
        Self { by_name }
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }
}

fn cell<'r>(row: &'r csv::StringRecord, idx: usize, row_no: usize, column: &str) -> Result<&'r str> {
    row.get(idx).ok_or_else(|| Error::Parse {
        row: row_no,
        column: column.to_string(),
        value: String::new(),
        reason: "cell missing".into(),
    })
}

fn parse_f64(row: &csv::StringRecord, idx: usize, row_no: usize, column: &str) -> Result<f64> {
    let raw = cell(row, idx, row_no, column)?;
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        row: row_no,
        column: column.to_string(),
        value: raw.to_string(),
        reason: "expected a number".into(),
    })
}

fn parse_u32(row: &csv::StringRecord, idx: usize, row_no: usize, column: &str) -> Result<u32> {
    let raw = cell(row, idx, row_no, column)?;
    raw.trim().parse::<u32>().map_err(|_| Error::Parse {
        row: row_no,
        column: column.to_string(),
        value: raw.to_string(),
        reason: "expected a non-negative integer".into(),
    })
}

fn parse_flag(row: &csv::StringRecord, idx: usize, row_no: usize, column: &str) -> Result<bool> {
    let raw = cell(row, idx, row_no, column)?;
    match raw.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse {
            row: row_no,
            column: column.to_string(),
            value: other.to_string(),
            reason: "expected 0 or 1".into(),
        }),
    }
}

fn parse_side(row: &csv::StringRecord, idx: usize, row_no: usize, column: &str) -> Result<PlayerSide> {
    let raw = cell(row, idx, row_no, column)?;
    PlayerSide::from_csv_code(raw).ok_or_else(|| Error::Parse {
        row: row_no,
        column: column.to_string(),
        value: raw.to_string(),
        reason: "expected 1 or 2".into(),
    })
}

/// Read match point records from any CSV reader.
///
/// The header must contain the metadata columns and a `_p1`/`_p2` pair for
/// every per-player feature the schema names; `psychological_factor` columns
/// may be absent and default to 0. Row indices in errors are 1-based data
/// rows.
pub fn read_records<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Vec<MatchPointRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = HeaderIndex::new(csv_reader.headers()?);

    for name in META_COLUMNS {
        header.require(name)?;
    }
    for spec in schema.features() {
        if spec.kind == FeatureKind::PerPlayer && spec.name != "psychological_factor" {
            header.require(&format!("{}_p1", spec.name))?;
            header.require(&format!("{}_p2", spec.name))?;
        }
    }

    let col = |name: &str| header.optional(name);
    let meta: HashMap<&str, usize> = META_COLUMNS
        .iter()
        .map(|name| (*name, header.require(name).expect("checked above")))
        .collect();

    let mut records = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        let elapsed_raw = cell(&row, meta["elapsed_time"], row_no, "elapsed_time")?;
        let elapsed_seconds = parse_elapsed(elapsed_raw).ok_or_else(|| Error::Parse {
            row: row_no,
            column: "elapsed_time".into(),
            value: elapsed_raw.to_string(),
            reason: "expected seconds or H:MM:SS".into(),
        })?;

        let mut sides = [PlayerPointStats::default(), PlayerPointStats::default()];
        for (pi, suffix) in ["_p1", "_p2"].iter().enumerate() {
            for base in PER_PLAYER_COLUMNS {
                let column = format!("{base}{suffix}");
                let Some(idx) = col(&column) else {
                    // Only columns the schema does not require may be absent.
                    continue;
                };
                let stats = &mut sides[pi];
                match base {
                    "p_sets" => stats.sets = parse_u32(&row, idx, row_no, &column)?,
                    "p_games" => stats.games = parse_u32(&row, idx, row_no, &column)?,
                    "p_ace" => stats.ace = parse_flag(&row, idx, row_no, &column)?,
                    "p_double_fault" => stats.double_fault = parse_flag(&row, idx, row_no, &column)?,
                    "p_break_pt_missed" => {
                        stats.break_pt_missed = parse_flag(&row, idx, row_no, &column)?
                    }
                    "p_break_pt_won" => stats.break_pt_won = parse_flag(&row, idx, row_no, &column)?,
                    "p_distance_run" => {
                        stats.distance_run = parse_f64(&row, idx, row_no, &column)?
                    }
                    "psychological_factor" => {
                        stats.psychological_factor = parse_f64(&row, idx, row_no, &column)?
                    }
                    _ => unreachable!(),
                }
            }
        }
        let [p1, p2] = sides;

        let record = MatchPointRecord {
            match_id: cell(&row, meta["match_id"], row_no, "match_id")?.to_string(),
            player1: cell(&row, meta["player1"], row_no, "player1")?.to_string(),
            player2: cell(&row, meta["player2"], row_no, "player2")?.to_string(),
            elapsed_seconds,
            server: parse_side(&row, meta["server"], row_no, "server")?,
            point_victor: parse_side(&row, meta["point_victor"], row_no, "point_victor")?,
            p1,
            p2,
        };
        record.validate(row_no)?;
        records.push(record);
    }

    for group in group_by_match(records.clone()) {
        validate_match(&group)?;
    }
    Ok(records)
}

/// Read and validate a match file from disk.
pub fn ingest_csv<P: AsRef<Path>>(path: P, schema: &FeatureSchema) -> Result<Vec<MatchPointRecord>> {
    let file = File::open(path.as_ref())?;
    read_records(file, schema)
}

fn flag(b: bool) -> u8 {
    b as u8
}

/// Write records in the canonical column layout used by [`read_records`].
pub fn write_records<W: Write>(records: &[MatchPointRecord], mut out: W) -> Result<()> {
    write!(out, "match_id,player1,player2,elapsed_time,server,point_victor")?;
    for base in PER_PLAYER_COLUMNS {
        write!(out, ",{base}_p1,{base}_p2")?;
    }
    writeln!(out)?;
    for r in records {
        write!(
            out,
            "{},{},{},{},{},{}",
            r.match_id,
            r.player1,
            r.player2,
            r.elapsed_seconds,
            r.server.csv_code(),
            r.point_victor.csv_code()
        )?;
        write!(
            out,
            ",{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.p1.sets,
            r.p2.sets,
            r.p1.games,
            r.p2.games,
            flag(r.p1.ace),
            flag(r.p2.ace),
            flag(r.p1.double_fault),
            flag(r.p2.double_fault),
            flag(r.p1.break_pt_missed),
            flag(r.p2.break_pt_missed),
            flag(r.p1.break_pt_won),
            flag(r.p2.break_pt_won),
            r.p1.distance_run,
            r.p2.distance_run,
            r.p1.psychological_factor,
            r.p2.psychological_factor
        )?;
        writeln!(out)?;
    }
    Ok(())
}

/// Write records to a file.
pub fn write_csv<P: AsRef<Path>>(records: &[MatchPointRecord], path: P) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_records(records, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::super::to_series;
    use super::*;

    fn sample_csv() -> String {
        let mut rows = String::from(
            "match_id,player1,player2,elapsed_time,server,point_victor,\
             p_sets_p1,p_sets_p2,p_games_p1,p_games_p2,p_ace_p1,p_ace_p2,\
             p_double_fault_p1,p_double_fault_p2,p_break_pt_missed_p1,p_break_pt_missed_p2,\
             p_break_pt_won_p1,p_break_pt_won_p2,p_distance_run_p1,p_distance_run_p2,\
             psychological_factor_p1,psychological_factor_p2\n",
        );
        rows.push_str("m1,A,B,0:00:30,1,2,0,0,0,0,0,0,0,0,0,0,0,0,10.5,12.25,5,5\n");
        rows.push_str("m1,A,B,0:01:30,1,1,0,0,0,0,1,0,0,0,0,0,0,0,8,9.5,5.5,4.5\n");
        rows.push_str("m1,A,B,0:02:10,2,1,0,0,1,0,0,0,0,0,0,0,0,0,11,7,6,4\n");
        rows
    }

    #[test]
    fn well_formed_file_ingests_in_order() {
        let records = read_records(sample_csv().as_bytes(), &FeatureSchema::standard()).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].elapsed_seconds, 30.0);
        assert!(records[1].p1.ace);
        assert_eq!(records[2].p1.games, 1);
    }

    #[test]
    fn hms_elapsed_time_converts_to_seconds() {
        assert_eq!(parse_elapsed("0:01:30"), Some(90.0));
        assert_eq!(parse_elapsed("2:00:05"), Some(7205.0));
        assert_eq!(parse_elapsed("42.5"), Some(42.5));
        assert_eq!(parse_elapsed("1:30"), None);
    }

    #[test]
    fn missing_distance_column_is_schema_error() {
        let csv = sample_csv().replace("p_distance_run_p1", "p_distance_run_px");
        let err = read_records(csv.as_bytes(), &FeatureSchema::standard()).unwrap_err();
        match err {
            Error::MissingColumn(name) => assert!(name.contains("p_distance_run")),
            other => panic!("expected missing column, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let csv = sample_csv().replace("10.5", "fast");
        let err = read_records(csv.as_bytes(), &FeatureSchema::standard()).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "p_distance_run_p1");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn psychological_factor_defaults_to_zero_when_absent() {
        let csv: String = sample_csv()
            .lines()
            .map(|line| {
                let cols: Vec<&str> = line.split(',').collect();
                cols[..cols.len() - 2].join(",") + "\n"
            })
            .collect();
        let records = read_records(csv.as_bytes(), &FeatureSchema::standard()).unwrap();
        assert_eq!(records[0].p1.psychological_factor, 0.0);
    }

    #[test]
    fn round_trip_preserves_series() {
        let schema = FeatureSchema::standard();
        let records = read_records(sample_csv().as_bytes(), &schema).unwrap();
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        let back = read_records(buf.as_slice(), &schema).unwrap();
        assert_eq!(records, back);
        let a = to_series(&records, PlayerSide::P1, &schema).unwrap();
        let b = to_series(&back, PlayerSide::P1, &schema).unwrap();
        assert_eq!(a, b);
    }
}
