//! Player momentum from weighted indicators and the opponent pressure matrix.
//!
//! Indicator importance comes from AHP pairwise-comparison matrices (one for
//! a player's own features, one for the opponent's influence); each
//! indicator is weighted with a logarithmic value term and a `1/(t+1)` time
//! decay, and the own-minus-opponent sum is scaled by the player-pair
//! pressure value.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::data::FeatureSchema;
use crate::error::{Error, Result};

/// Clamp floor for indicator values entering the log term; count and flag
/// features are frequently zero.
pub const LOG_CLAMP: f64 = 1e-6;

/// Saaty random consistency indices by matrix size (index `n-1`).
const RANDOM_INDEX: [f64; 15] = [
    0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49, 1.51, 1.48, 1.56, 1.57, 1.59,
];

const POWER_ITER_TOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 1000;
const CONSISTENCY_BOUND: f64 = 0.1;

/// Positive reciprocal pairwise-comparison matrix.
#[derive(Debug, Clone)]
pub struct AhpPairwiseMatrix {
    values: Vec<Vec<f64>>,
}

impl AhpPairwiseMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::EmptyInput("empty AHP matrix".into()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape {
                    expected: format!("{n}x{n} matrix"),
                    got: format!("row {i} of width {}", row.len()),
                });
            }
            if values[i][i] != 1.0 {
                return Err(Error::Invariant(format!(
                    "AHP diagonal entry ({i},{i}) is {}, expected 1",
                    values[i][i]
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Invariant(format!(
                        "AHP entry ({i},{j}) = {v} must be positive"
                    )));
                }
                if (v * values[j][i] - 1.0).abs() >= 1e-9 {
                    return Err(Error::Invariant(format!(
                        "AHP reciprocity broken at ({i},{j}): {v} * {} != 1",
                        values[j][i]
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    /// Exactly consistent matrix built from a priority vector: `A[i][j] =
    /// w[i] / w[j]`.
    pub fn from_priorities(priorities: &[f64]) -> Result<Self> {
        if priorities.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Invariant("priorities must be positive".into()));
        }
        let values = priorities
            .iter()
            .map(|&wi| priorities.iter().map(|&wj| wi / wj).collect())
            .collect();
        Self::new(values)
    }

    /// Parse a headerless CSV of matrix rows.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        for (i, row) in csv_reader.records().enumerate() {
            let row = row?;
            let parsed = row
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<f64>().map_err(|_| Error::Parse {
                        row: i + 1,
                        column: format!("{j}"),
                        value: cell.to_string(),
                        reason: "expected a number".into(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            values.push(parsed);
        }
        Self::new(values)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv(File::open(path.as_ref())?)
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Principal-eigenvector weights and the consistency ratio of a pairwise
/// matrix, via power iteration.
///
/// Fails with [`Error::AhpInconsistent`] when the consistency ratio exceeds
/// the standard 0.1 acceptance bound.
pub fn ahp_weights(matrix: &AhpPairwiseMatrix) -> Result<(Vec<f64>, f64)> {
    let n = matrix.size();
    let a = &matrix.values;
    let mut v = vec![1.0 / n as f64; n];
    let mut converged = false;
    for _ in 0..POWER_ITER_MAX {
        let mut next: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum())
            .collect();
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= sum);
        let delta = next
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < POWER_ITER_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("AHP power iteration did not reach {POWER_ITER_TOL} in {POWER_ITER_MAX} steps");
    }
    // Rayleigh-style estimate of the dominant eigenvalue.
    let lambda: f64 = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum::<f64>() / v[i])
        .sum::<f64>()
        / n as f64;
    let cr = if n <= 2 {
        0.0
    } else {
        let ri = RANDOM_INDEX[(n - 1).min(RANDOM_INDEX.len() - 1)];
        ((lambda - n as f64) / (n as f64 - 1.0)) / ri
    };
    if cr > CONSISTENCY_BOUND {
        return Err(Error::AhpInconsistent { cr });
    }
    Ok((v, cr))
}

/// Which side of the pairing a weighted indicator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSide {
    Own,
    Opponent,
}

/// Importance weights and weighting constants for the momentum sum.
#[derive(Debug, Clone, Serialize)]
pub struct IndicatorWeights {
    /// Own-effect importance `g`, normalized to sum 1.
    pub own: Vec<f64>,
    /// Opponent-influence importance, normalized to sum 1.
    pub opponent: Vec<f64>,
    /// Limiting factor `d` in `(0, 1]`.
    pub limiting: f64,
    /// Per-feature exponent (1 or 2) applied inside the log term.
    pub exponents: Vec<u8>,
    /// Consistency ratios of the two source matrices.
    pub own_cr: f64,
    pub opponent_cr: f64,
}

impl IndicatorWeights {
    pub fn new(
        own: Vec<f64>,
        opponent: Vec<f64>,
        limiting: f64,
        exponents: Vec<u8>,
    ) -> Result<Self> {
        let n = own.len();
        if opponent.len() != n || exponents.len() != n {
            return Err(Error::Shape {
                expected: format!("{n} weights per side and {n} exponents"),
                got: format!("{} / {}", opponent.len(), exponents.len()),
            });
        }
        for side in [&own, &opponent] {
            if side.iter().any(|&g| g < 0.0) {
                return Err(Error::Invariant("negative importance weight".into()));
            }
            let sum: f64 = side.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Invariant(format!(
                    "importance weights sum to {sum}, expected 1"
                )));
            }
        }
        if !(limiting > 0.0 && limiting <= 1.0) {
            return Err(Error::Invariant(format!(
                "limiting factor {limiting} outside (0, 1]"
            )));
        }
        if exponents.iter().any(|&k| k != 1 && k != 2) {
            return Err(Error::Invariant("exponents must be 1 or 2".into()));
        }
        Ok(Self {
            own,
            opponent,
            limiting,
            exponents,
            own_cr: 0.0,
            opponent_cr: 0.0,
        })
    }

    /// Derive weights from a pair of AHP matrices over the schema features.
    pub fn from_ahp(
        own: &AhpPairwiseMatrix,
        opponent: &AhpPairwiseMatrix,
        schema: &FeatureSchema,
    ) -> Result<Self> {
        let n = schema.feature_count();
        if own.size() != n || opponent.size() != n {
            return Err(Error::Shape {
                expected: format!("{n}x{n} AHP matrices"),
                got: format!("{}x{} / {}x{}", own.size(), own.size(), opponent.size(), opponent.size()),
            });
        }
        let (own_w, own_cr) = ahp_weights(own)?;
        let (opp_w, opp_cr) = ahp_weights(opponent)?;
        let exponents = schema
            .feature_names()
            .iter()
            .map(|name| default_exponent(name))
            .collect();
        let mut weights = Self::new(own_w, opp_w, 1.0, exponents)?;
        weights.own_cr = own_cr;
        weights.opponent_cr = opp_cr;
        Ok(weights)
    }

    /// Shipped default calibration over the given schema.
    pub fn default_for(schema: &FeatureSchema) -> Result<Self> {
        let own = default_own_matrix(schema)?;
        let opponent = default_opponent_matrix(schema)?;
        Self::from_ahp(&own, &opponent, schema)
    }

    pub fn feature_count(&self) -> usize {
        self.own.len()
    }
}

/// Distance-type features square the value inside the log; indicator and
/// count features keep it.
pub fn default_exponent(feature_name: &str) -> u8 {
    if feature_name.contains("distance") {
        2
    } else {
        1
    }
}

// Shipped default importances over the standard feature set; unknown names
// fall back to a small uniform weight.
fn default_priority(name: &str, own_side: bool) -> f64 {
    match (name, own_side) {
        ("p_sets", true) => 0.18,
        ("p_games", true) => 0.14,
        ("server", true) => 0.06,
        ("p_ace", true) => 0.10,
        ("p_double_fault", true) => 0.08,
        ("p_break_pt_missed", true) => 0.09,
        ("p_break_pt_won", true) => 0.16,
        ("p_distance_run", true) => 0.05,
        ("psychological_factor", true) => 0.14,
        ("p_sets", false) => 0.16,
        ("p_games", false) => 0.13,
        ("server", false) => 0.07,
        ("p_ace", false) => 0.14,
        ("p_double_fault", false) => 0.06,
        ("p_break_pt_missed", false) => 0.07,
        ("p_break_pt_won", false) => 0.20,
        ("p_distance_run", false) => 0.05,
        ("psychological_factor", false) => 0.12,
        _ => 0.05,
    }
}

/// Default own-effect pairwise matrix for a schema.
pub fn default_own_matrix(schema: &FeatureSchema) -> Result<AhpPairwiseMatrix> {
    let priorities: Vec<f64> = schema
        .feature_names()
        .iter()
        .map(|n| default_priority(n, true))
        .collect();
    AhpPairwiseMatrix::from_priorities(&priorities)
}

/// Default opponent-influence pairwise matrix for a schema.
pub fn default_opponent_matrix(schema: &FeatureSchema) -> Result<AhpPairwiseMatrix> {
    let priorities: Vec<f64> = schema
        .feature_names()
        .iter()
        .map(|n| default_priority(n, false))
        .collect();
    AhpPairwiseMatrix::from_priorities(&priorities)
}

/// Time-decayed weighted value of indicator `z` at time `t` with raw value
/// `r`: `d * g_z * k_z * ln(max(r, eps)) + 1/(t+1)`.
pub fn indicator_weight(
    weights: &IndicatorWeights,
    z: usize,
    t: usize,
    r: f64,
    side: WeightSide,
) -> f64 {
    let g = match side {
        WeightSide::Own => weights.own[z],
        WeightSide::Opponent => weights.opponent[z],
    };
    let k = weights.exponents[z] as f64;
    weights.limiting * g * k * r.max(LOG_CLAMP).ln() + 1.0 / (t as f64 + 1.0)
}

/// Pairwise pressure values between players.
#[derive(Debug, Clone)]
pub struct PressureMatrix {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<Vec<f64>>,
}

impl PressureMatrix {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyInput("empty pressure matrix".into()));
        }
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(Error::Shape {
                expected: format!("{n}x{n} pressure matrix"),
                got: format!("{} rows", values.len()),
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row[i] != 1.0 {
                return Err(Error::Invariant(format!(
                    "pressure diagonal for `{}` is {}, expected exactly 1",
                    labels[i], row[i]
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Invariant(format!(
                        "pressure entry ({}, {}) = {v} must be positive",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(Self {
            labels,
            index,
            values,
        })
    }

    /// Neutral matrix (all pressures 1) over the given players.
    pub fn neutral(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![vec![1.0; n]; n])
    }

    /// Parse a CSV with a header row of player names and a leading label
    /// column per row.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = csv_reader.headers()?.clone();
        let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows: HashMap<String, Vec<f64>> = HashMap::new();
        for (i, row) in csv_reader.records().enumerate() {
            let row = row?;
            let name = row
                .get(0)
                .ok_or_else(|| Error::EmptyInput("missing row label".into()))?
                .to_string();
            let parsed = row
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<f64>().map_err(|_| Error::Parse {
                        row: i + 1,
                        column: labels.get(j).cloned().unwrap_or_default(),
                        value: cell.to_string(),
                        reason: "expected a number".into(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.insert(name, parsed);
        }
        let values = labels
            .iter()
            .map(|name| {
                rows.remove(name)
                    .ok_or_else(|| Error::MissingColumn(format!("pressure row for `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, values)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv(File::open(path.as_ref())?)
    }

    pub fn players(&self) -> &[String] {
        &self.labels
    }

    /// Pressure of `i` facing `j`; unknown players are an error.
    pub fn get(&self, i: &str, j: &str) -> Result<f64> {
        let row = *self
            .index
            .get(i)
            .ok_or_else(|| Error::UnknownPlayer(i.to_string()))?;
        let col = *self
            .index
            .get(j)
            .ok_or_else(|| Error::UnknownPlayer(j.to_string()))?;
        Ok(self.values[row][col])
    }

    /// Pressure with a neutral 1.0 fallback for unseen pairs, so evaluation
    /// never stalls on new players.
    pub fn get_or_default(&self, i: &str, j: &str) -> f64 {
        match self.get(i, j) {
            Ok(v) => v,
            Err(_) => {
                log::warn!("no pressure value for ({i}, {j}); defaulting to 1.0");
                1.0
            }
        }
    }
}

/// Per-player momentum trace.
#[derive(Debug, Clone)]
pub struct MomentumSeries {
    pub values: Vec<f64>,
    pub player: String,
    pub opponent: String,
}

/// Momentum of player `i` against player `j` from both players'
/// reconstructed feature matrices (rows of width `n`).
pub fn momentum(
    xi: &[Vec<f64>],
    xj: &[Vec<f64>],
    weights: &IndicatorWeights,
    pressure: &PressureMatrix,
    i: &str,
    j: &str,
) -> Result<MomentumSeries> {
    let n = weights.feature_count();
    if xi.len() != xj.len() {
        return Err(Error::Shape {
            expected: format!("matching series of length {}", xi.len()),
            got: format!("{}", xj.len()),
        });
    }
    if xi.iter().chain(xj).any(|row| row.len() != n) {
        return Err(Error::Shape {
            expected: format!("feature rows of width {n}"),
            got: "mismatched row width".into(),
        });
    }
    let scale = pressure.get_or_default(i, j);
    let values = xi
        .iter()
        .zip(xj)
        .enumerate()
        .map(|(t, (own_row, opp_row))| {
            let sum: f64 = (0..n)
                .map(|z| {
                    let own = indicator_weight(weights, z, t, own_row[z], WeightSide::Own)
                        * own_row[z];
                    let opp = indicator_weight(weights, z, t, opp_row[z], WeightSide::Opponent)
                        * opp_row[z];
                    own - opp
                })
                .sum();
            scale * sum
        })
        .collect();
    Ok(MomentumSeries {
        values,
        player: i.to_string(),
        opponent: j.to_string(),
    })
}
