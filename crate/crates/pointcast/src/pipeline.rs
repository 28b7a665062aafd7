//! Composition of the momentum-encoding stages.
//!
//! Bundles the feature schema, change-point settings, indicator weights, and
//! pressure matrix so callers can go from raw match records to both players'
//! momentum series in one call.

use crate::data::{to_series, FeatureSchema, MatchPointRecord, PlayerSide};
use crate::error::{Error, Result};
use crate::llsa::{reconstruct, ChangePointConfig};
use crate::modwt::WaveletFilter;
use crate::momentum::{momentum, IndicatorWeights, MomentumSeries, PressureMatrix};

/// Everything needed to turn one match's records into momentum series.
#[derive(Debug, Clone)]
pub struct MomentumPipeline {
    pub schema: FeatureSchema,
    pub weights: IndicatorWeights,
    pub pressure: PressureMatrix,
    pub changepoint: ChangePointConfig,
    pub filter: WaveletFilter,
}

impl MomentumPipeline {
    /// Default-calibrated pipeline over the standard schema with a neutral
    /// pressure matrix covering `players`.
    pub fn standard(players: Vec<String>) -> Result<Self> {
        let schema = FeatureSchema::standard();
        let weights = IndicatorWeights::default_for(&schema)?;
        Ok(Self {
            schema,
            weights,
            pressure: PressureMatrix::neutral(players)?,
            changepoint: ChangePointConfig::default(),
            filter: WaveletFilter::haar(),
        })
    }

    /// Momentum of both players of one match: per-player feature series,
    /// jump-preserving reconstruction, then the weighted opponent-differenced
    /// sum.
    pub fn momentum_pair(
        &self,
        records: &[MatchPointRecord],
    ) -> Result<(MomentumSeries, MomentumSeries)> {
        if records.is_empty() {
            return Err(Error::EmptyInput("no records in match".into()));
        }
        let p1 = records[0].player1.clone();
        let p2 = records[0].player2.clone();

        let series1 = to_series(records, PlayerSide::P1, &self.schema)?;
        let series2 = to_series(records, PlayerSide::P2, &self.schema)?;
        let rebuilt1 = reconstruct(&series1, &self.changepoint, &self.filter)?;
        let rebuilt2 = reconstruct(&series2, &self.changepoint, &self.filter)?;

        let rows1 = rebuilt1.values.rows();
        let rows2 = rebuilt2.values.rows();
        let m1 = momentum(rows1, rows2, &self.weights, &self.pressure, &p1, &p2)?;
        let m2 = momentum(rows2, rows1, &self.weights, &self.pressure, &p2, &p1)?;
        Ok((m1, m2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic_match;

    #[test]
    fn momentum_pair_tracks_planted_shift() {
        let records = generate_synthetic_match(3, 320, &[(160, 3.0)]).unwrap();
        let pipeline =
            MomentumPipeline::standard(vec!["P1".into(), "P2".into()]).unwrap();
        let (m1, m2) = pipeline.momentum_pair(&records).unwrap();
        assert_eq!(m1.values.len(), 320);
        assert_eq!(m2.values.len(), 320);
        assert!(m1.values.iter().all(|v| v.is_finite()));
        // Player 1 gains momentum relative to player 2 after the shift.
        let diff_before: f64 = (40..150)
            .map(|t| m1.values[t] - m2.values[t])
            .sum::<f64>()
            / 110.0;
        let diff_after: f64 = (170..310)
            .map(|t| m1.values[t] - m2.values[t])
            .sum::<f64>()
            / 140.0;
        assert!(
            diff_after > diff_before + 0.1,
            "before {diff_before}, after {diff_after}"
        );
    }
}
