//! The benchmarked models: the momentum forecaster and the two baselines.

use std::collections::HashMap;

use crate::data::{FeatureSchema, MatchPointRecord, PlayerSide};
use crate::error::Result;
use crate::forecast::{padded_window, training_windows, ForecastModel, TrainConfig};
use crate::outcome::{actual_victor, decide, RankingTable};

use super::benchmark::{BenchmarkEntry, MatchData, PointPrediction, PointPredictor};
use super::elo::{elo_predict, elo_update, EloConfig};
use super::logistic::{logistic_baseline_train, logistic_predict, LogisticConfig};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Full-pipeline model: trains the dual-head forecaster on the training
/// matches' momentum series and decides points by comparing the two
/// players' next-point forecasts.
pub struct MomentumPredictor {
    train_config: TrainConfig,
    window_stride: usize,
    ranks: RankingTable,
    model: Option<ForecastModel>,
}

impl MomentumPredictor {
    pub fn new(train_config: TrainConfig, window_stride: usize, ranks: RankingTable) -> Self {
        Self {
            train_config,
            window_stride,
            ranks,
            model: None,
        }
    }
}

impl PointPredictor for MomentumPredictor {
    fn fit(&mut self, train: &[&MatchData]) -> Result<()> {
        let window = self.train_config.window;
        let mut data = Vec::new();
        for m in train {
            data.extend(training_windows(
                &m.momentum_p1.values,
                window,
                self.window_stride,
            ));
            data.extend(training_windows(
                &m.momentum_p2.values,
                window,
                self.window_stride,
            ));
        }
        let mut model = ForecastModel::init(&self.train_config)?;
        model.train(&data)?;
        self.model = Some(model);
        Ok(())
    }

    fn predict_match(&self, data: &MatchData) -> Result<Vec<PointPrediction>> {
        let model = self
            .model
            .as_ref()
            .expect("predict_match called before fit");
        let window = model.config.window;
        let p1 = &data.records[0].player1;
        let p2 = &data.records[0].player2;
        let mut out = Vec::with_capacity(data.records.len() - 1);
        for t in 1..data.records.len() {
            let w1 = padded_window(&data.momentum_p1.values, t - 1, window);
            let w2 = padded_window(&data.momentum_p2.values, t - 1, window);
            let f1 = model.forecast_next(&w1)?;
            let f2 = model.forecast_next(&w2)?;
            let decision = decide(f1, f2, p1, p2, &self.ranks)?;
            out.push(PointPrediction {
                prob_p1: sigmoid(decision.margin),
                pick_p1: &decision.winner == p1,
            });
        }
        Ok(out)
    }
}

/// Point-level ELO baseline: ratings learned over the training matches,
/// then walked forward within each test match (predict, then update).
pub struct EloPredictor {
    config: EloConfig,
    ratings: HashMap<String, f64>,
}

impl EloPredictor {
    pub fn new(config: EloConfig) -> Self {
        Self {
            config,
            ratings: HashMap::new(),
        }
    }

    fn rating(map: &HashMap<String, f64>, player: &str, cfg: &EloConfig) -> f64 {
        map.get(player).copied().unwrap_or(cfg.initial_rating)
    }

    fn update_with_point(
        map: &mut HashMap<String, f64>,
        record: &MatchPointRecord,
        cfg: &EloConfig,
    ) {
        let r1 = Self::rating(map, &record.player1, cfg);
        let r2 = Self::rating(map, &record.player2, cfg);
        let score = (record.point_victor == PlayerSide::P1) as u8 as f64;
        let (n1, n2) = elo_update(r1, r2, score, cfg);
        map.insert(record.player1.clone(), n1);
        map.insert(record.player2.clone(), n2);
    }
}

impl PointPredictor for EloPredictor {
    fn fit(&mut self, train: &[&MatchData]) -> Result<()> {
        self.ratings.clear();
        for m in train {
            for record in &m.records {
                Self::update_with_point(&mut self.ratings, record, &self.config);
            }
        }
        Ok(())
    }

    fn predict_match(&self, data: &MatchData) -> Result<Vec<PointPrediction>> {
        let mut local = self.ratings.clone();
        let mut out = Vec::with_capacity(data.records.len() - 1);
        for (t, record) in data.records.iter().enumerate() {
            if t >= 1 {
                let r1 = Self::rating(&local, &record.player1, &self.config);
                let r2 = Self::rating(&local, &record.player2, &self.config);
                let prob = elo_predict(r1, r2, &self.config);
                out.push(PointPrediction {
                    prob_p1: prob,
                    pick_p1: prob >= 0.5,
                });
            }
            Self::update_with_point(&mut local, record, &self.config);
        }
        Ok(out)
    }
}

/// Logistic regression on the previous point's feature vector (both
/// players' schema features).
pub struct LogisticPredictor {
    config: LogisticConfig,
    schema: FeatureSchema,
    weights: Vec<f64>,
}

impl LogisticPredictor {
    pub fn new(config: LogisticConfig, schema: FeatureSchema) -> Self {
        Self {
            config,
            schema,
            weights: Vec::new(),
        }
    }

    fn point_features(&self, records: &[MatchPointRecord], t: usize) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.schema.feature_count() * 2);
        for side in [PlayerSide::P1, PlayerSide::P2] {
            for spec in self.schema.features() {
                row.push(self.schema.record_value(spec, &records[t], side));
            }
        }
        row
    }
}

impl PointPredictor for LogisticPredictor {
    fn fit(&mut self, train: &[&MatchData]) -> Result<()> {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for m in train {
            for t in 1..m.records.len() {
                features.push(self.point_features(&m.records, t - 1));
                let record = &m.records[t];
                labels.push(actual_victor(record) == record.player1);
            }
        }
        self.weights = logistic_baseline_train(&features, &labels, &self.config)?;
        Ok(())
    }

    fn predict_match(&self, data: &MatchData) -> Result<Vec<PointPrediction>> {
        let mut out = Vec::with_capacity(data.records.len() - 1);
        for t in 1..data.records.len() {
            let row = self.point_features(&data.records, t - 1);
            let prob = logistic_predict(&self.weights, &row);
            out.push(PointPrediction {
                prob_p1: prob,
                pick_p1: prob >= 0.5,
            });
        }
        Ok(out)
    }
}

/// The standard three-way comparison: momentum pipeline, ELO, logistic
/// regression.
pub fn standard_entries(
    train_config: &TrainConfig,
    window_stride: usize,
    ranks: &RankingTable,
    elo: &EloConfig,
    logistic: &LogisticConfig,
    schema: &FeatureSchema,
) -> Vec<BenchmarkEntry> {
    let (tc, st, rk) = (train_config.clone(), window_stride, ranks.clone());
    let momentum_entry = BenchmarkEntry::new("momentum", move || {
        Box::new(MomentumPredictor::new(tc.clone(), st, rk.clone()))
    });
    let elo_cfg = elo.clone();
    let elo_entry = BenchmarkEntry::new("elo", move || {
        Box::new(EloPredictor::new(elo_cfg.clone()))
    });
    let (lr_cfg, lr_schema) = (logistic.clone(), schema.clone());
    let logistic_entry = BenchmarkEntry::new("logistic", move || {
        Box::new(LogisticPredictor::new(lr_cfg.clone(), lr_schema.clone()))
    });
    vec![momentum_entry, elo_entry, logistic_entry]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic_match;
    use crate::pipeline::MomentumPipeline;

    fn prepared_match(seed: u64) -> MatchData {
        let records = generate_synthetic_match(seed, 80, &[(40, 2.0)]).unwrap();
        let pipeline = MomentumPipeline::standard(vec!["P1".into(), "P2".into()]).unwrap();
        MatchData::prepare(records, &pipeline).unwrap()
    }

    #[test]
    fn elo_walk_forward_adapts_within_match() {
        let data = prepared_match(5);
        let cfg = EloConfig::default();
        let mut model = EloPredictor::new(cfg.clone());
        model.fit(&[]).unwrap();
        let preds = model.predict_match(&data).unwrap();
        assert_eq!(preds.len(), 79);
        // The first prediction reflects exactly one observed point: both
        // players start at the initial rating and point 0 moves them.
        let score = (data.records[0].point_victor == PlayerSide::P1) as u8 as f64;
        let (r1, r2) = elo_update(cfg.initial_rating, cfg.initial_rating, score, &cfg);
        let expected = elo_predict(r1, r2, &cfg);
        assert!((preds[0].prob_p1 - expected).abs() < 1e-12);
    }

    #[test]
    fn logistic_predictor_runs_end_to_end() {
        let train = [prepared_match(1), prepared_match(2)];
        let refs: Vec<&MatchData> = train.iter().collect();
        let mut model =
            LogisticPredictor::new(LogisticConfig::default(), FeatureSchema::standard());
        model.fit(&refs).unwrap();
        let preds = model.predict_match(&train[0]).unwrap();
        assert_eq!(preds.len(), 79);
        assert!(preds.iter().all(|p| (0.0..=1.0).contains(&p.prob_p1)));
    }

    #[test]
    fn momentum_predictor_fits_and_predicts() {
        let cfg = TrainConfig {
            window: 16,
            hidden: 8,
            key_dim: 4,
            attention_levels: 2,
            kernel_sizes: vec![3, 5],
            learning_rate: 0.02,
            epochs: 2,
            batch_size: 16,
            seed: 1,
            sgd_momentum: 0.0,
        };
        let ranks = RankingTable::new([("P1".to_string(), 1), ("P2".to_string(), 2)]).unwrap();
        let train = [prepared_match(3), prepared_match(4)];
        let refs: Vec<&MatchData> = train.iter().collect();
        let mut model = MomentumPredictor::new(cfg, 4, ranks);
        model.fit(&refs).unwrap();
        let preds = model.predict_match(&train[0]).unwrap();
        assert_eq!(preds.len(), 79);
        assert!(preds.iter().all(|p| p.prob_p1.is_finite()));
    }
}
