//! Next-point momentum forecasting.
//!
//! A momentum window is split into trend and seasonal parts (shared,
//! trainable decomposition logits); the trend goes through RevIN and a
//! three-layer MLP, the seasonal through wavelet attention, and the forecast
//! is their sum. Training is plain or momentum SGD on mean squared error
//! with hand-written reverse-mode gradients through every block, checked
//! against central finite differences.

mod attention;
mod mlp;
mod revin;

pub use attention::{AttentionGrads, WaveletAttentionParams};
pub use mlp::MlpParams;
pub use revin::{revin_denorm, revin_denorm_scalar, revin_norm, RevinParams, RevinState, REVIN_EPS};

use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{moving_average, softmax, validate_kernels};
use crate::error::{Error, Result};
use crate::modwt::WaveletFilter;

use attention::AttentionTape;
use mlp::MlpTape;

/// Architecture and optimization settings, snapshotted into the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Input window length.
    pub window: usize,
    /// Hidden width of the trend MLP.
    pub hidden: usize,
    /// Channels of the attention projections.
    pub key_dim: usize,
    /// Wavelet depth inside the attention head.
    pub attention_levels: usize,
    /// Moving-average kernel sizes of the decomposition.
    pub kernel_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// 0 is plain gradient descent; anything in (0, 1) is momentum SGD.
    pub sgd_momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            window: 400,
            hidden: 64,
            key_dim: 8,
            attention_levels: 2,
            kernel_sizes: vec![5, 13, 25],
            learning_rate: 0.01,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            sgd_momentum: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        validate_kernels(&self.kernel_sizes, self.window)?;
        if self.window < (1 << self.attention_levels) {
            return Err(Error::Config(format!(
                "window {} too short for {} attention levels",
                self.window, self.attention_levels
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.hidden == 0 || self.key_dim == 0 {
            return Err(Error::Config("hidden and key_dim must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.sgd_momentum) {
            return Err(Error::Config("sgd_momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Trainable forecaster: both heads, the decomposition logits, and the
/// RevIN affine pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub mlp: MlpParams,
    pub attention: WaveletAttentionParams,
    pub decompose_logits: Vec<f64>,
    pub revin: RevinParams,
    pub config: TrainConfig,
}

/// Gradient (or optimizer-velocity) container mirroring the parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub mlp: MlpParams,
    pub attention: AttentionGrads,
    pub logits: Vec<f64>,
    pub revin_scale: f64,
    pub revin_shift: f64,
}

impl Gradients {
    fn zeros(model: &ForecastModel) -> Self {
        Self {
            mlp: MlpParams::zeros(model.config.window, model.config.hidden),
            attention: AttentionGrads::zeros(model.config.key_dim),
            logits: vec![0.0; model.decompose_logits.len()],
            revin_scale: 0.0,
            revin_shift: 0.0,
        }
    }

    fn add_scaled(&mut self, other: &Gradients, factor: f64) {
        self.mlp.add_scaled(&other.mlp, factor);
        self.attention.add_scaled(&other.attention, factor);
        for (a, b) in self.logits.iter_mut().zip(&other.logits) {
            *a += factor * b;
        }
        self.revin_scale += factor * other.revin_scale;
        self.revin_shift += factor * other.revin_shift;
    }

    fn scale(&mut self, factor: f64) {
        self.mlp.scale(factor);
        self.attention.scale(factor);
        self.logits.iter_mut().for_each(|v| *v *= factor);
        self.revin_scale *= factor;
        self.revin_shift *= factor;
    }
}

struct ForwardTape {
    averages: Vec<Vec<f64>>,
    weights: Vec<f64>,
    trend: Vec<f64>,
    seasonal: Vec<f64>,
    state: RevinState,
    normalized: Vec<f64>,
    mlp_tape: MlpTape,
    mlp_out: f64,
    attention_tape: AttentionTape,
    trend_forecast: f64,
    seasonal_forecast: f64,
}

impl ForecastModel {
    /// Fresh model with seeded initialization.
    pub fn init(config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            mlp: MlpParams::init(config.window, config.hidden, &mut rng),
            attention: WaveletAttentionParams::init(
                config.key_dim,
                config.attention_levels,
                WaveletFilter::haar(),
                &mut rng,
            ),
            decompose_logits: vec![0.0; config.kernel_sizes.len()],
            revin: RevinParams::default(),
            config: config.clone(),
        })
    }

    fn check_window(&self, window: &[f64]) -> Result<()> {
        if window.len() != self.config.window {
            return Err(Error::Shape {
                expected: format!("window of length {}", self.config.window),
                got: format!("{}", window.len()),
            });
        }
        Ok(())
    }

    fn forward_full(&self, window: &[f64]) -> Result<(ForwardTape, f64)> {
        self.check_window(window)?;
        let weights = softmax(&self.decompose_logits);
        let averages: Vec<Vec<f64>> = self
            .config
            .kernel_sizes
            .iter()
            .map(|&k| moving_average(window, k))
            .collect();
        let mut trend = vec![0.0; window.len()];
        for (ma, &w) in averages.iter().zip(&weights) {
            for (t, v) in ma.iter().enumerate() {
                trend[t] += w * v;
            }
        }
        let seasonal: Vec<f64> = window.iter().zip(&trend).map(|(x, t)| x - t).collect();

        let (normalized, state) = revin_norm(&trend, &self.revin);
        let (mlp_tape, mlp_out) = self.mlp.forward_tape(&normalized);
        let trend_forecast = revin_denorm_scalar(mlp_out, &self.revin, &state);

        let (attention_tape, seasonal_forecast) = self.attention.forward_tape(&seasonal)?;

        let forecast = trend_forecast + seasonal_forecast;
        Ok((
            ForwardTape {
                averages,
                weights,
                trend,
                seasonal,
                state,
                normalized,
                mlp_tape,
                mlp_out,
                attention_tape,
                trend_forecast,
                seasonal_forecast,
            },
            forecast,
        ))
    }

    /// Trend-head and seasonal-head forecasts; their sum is the next point.
    pub fn forecast_parts(&self, window: &[f64]) -> Result<(f64, f64)> {
        let (tape, _) = self.forward_full(window)?;
        Ok((tape.trend_forecast, tape.seasonal_forecast))
    }

    /// Forecast the next momentum value from a full-length window.
    pub fn forecast_next(&self, window: &[f64]) -> Result<f64> {
        let (trend, seasonal) = self.forecast_parts(window)?;
        Ok(trend + seasonal)
    }

    // Reverse-mode pass for upstream derivative `dy` of the forecast.
    fn backward(&self, tape: &ForwardTape, dy: f64) -> Result<Gradients> {
        let len = self.config.window as f64;
        let mut grads = Gradients::zeros(self);

        // Seasonal head.
        let (att_grads, d_seasonal) =
            self.attention
                .backward(&tape.attention_tape, &tape.seasonal, dy)?;
        grads.attention = att_grads;

        // Trend head: denormalize, MLP, normalize.
        let sd = tape.state.guarded_std();
        let gamma = self.revin.scale;
        let shift = self.revin.shift;
        let mu = tape.state.mean;

        let du = dy * sd / gamma;
        let mut d_gamma = dy * (-(tape.mlp_out - shift) * sd / (gamma * gamma));
        let mut d_shift = dy * (-sd / gamma);
        let mut d_sd = dy * (tape.mlp_out - shift) / gamma;
        let mut d_mu = dy;

        let (mlp_grads, dz) = self.mlp.backward(&tape.mlp_tape, &tape.normalized, du);
        grads.mlp = mlp_grads;

        let mut d_trend = vec![0.0; tape.trend.len()];
        for (i, &dzi) in dz.iter().enumerate() {
            let centered = tape.trend[i] - mu;
            d_gamma += dzi * centered / sd;
            d_shift += dzi;
            d_trend[i] += dzi * gamma / sd;
            d_mu += dzi * (-gamma / sd);
            d_sd += dzi * (-gamma * centered / (sd * sd));
        }
        grads.revin_scale = d_gamma;
        grads.revin_shift = d_shift;

        // Window statistics: the epsilon guard gates the std path.
        let d_std = if tape.state.std > REVIN_EPS { d_sd } else { 0.0 };
        if d_std != 0.0 && tape.state.std > 0.0 {
            let d_var = d_std / (2.0 * tape.state.std);
            for (i, t) in tape.trend.iter().enumerate() {
                d_trend[i] += d_var * 2.0 * (t - mu) / len;
            }
        }
        for d in d_trend.iter_mut() {
            *d += d_mu / len;
        }

        // Decomposition: seasonal = window - trend, so its gradient flows
        // back into the trend with opposite sign.
        let d_trend_total: Vec<f64> = d_trend
            .iter()
            .zip(&d_seasonal)
            .map(|(t, s)| t - s)
            .collect();
        let d_weights: Vec<f64> = tape
            .averages
            .iter()
            .map(|ma| ma.iter().zip(&d_trend_total).map(|(m, d)| m * d).sum())
            .collect();
        let dot: f64 = d_weights.iter().zip(&tape.weights).map(|(d, w)| d * w).sum();
        for (f, (dw, w)) in d_weights.iter().zip(&tape.weights).enumerate() {
            grads.logits[f] = w * (dw - dot);
        }
        Ok(grads)
    }

    /// Squared error of one sample.
    pub fn sample_loss(&self, window: &[f64], target: f64) -> Result<f64> {
        let forecast = self.forecast_next(window)?;
        Ok((forecast - target) * (forecast - target))
    }

    fn sample_gradients(&self, window: &[f64], target: f64) -> Result<(Gradients, f64)> {
        let (tape, forecast) = self.forward_full(window)?;
        let err = forecast - target;
        let grads = self.backward(&tape, 2.0 * err)?;
        Ok((grads, err * err))
    }

    fn apply_update(&mut self, step: &Gradients, factor: f64) {
        self.mlp.add_scaled(&step.mlp, factor);
        for (w, g) in self.attention.wq.iter_mut().zip(&step.attention.wq) {
            *w += factor * g;
        }
        for (w, g) in self.attention.wk.iter_mut().zip(&step.attention.wk) {
            *w += factor * g;
        }
        for (w, g) in self.attention.wv.iter_mut().zip(&step.attention.wv) {
            *w += factor * g;
        }
        for (w, g) in self.attention.wo.iter_mut().zip(&step.attention.wo) {
            *w += factor * g;
        }
        self.attention.bo += factor * step.attention.bo;
        for (l, g) in self.decompose_logits.iter_mut().zip(&step.logits) {
            *l += factor * g;
        }
        self.revin.scale += factor * step.revin_scale;
        self.revin.shift += factor * step.revin_shift;
    }

    /// Minimize mean squared forecast error over `(window, next value)`
    /// pairs. Deterministic for a fixed config seed; returns the per-epoch
    /// mean loss curve.
    pub fn train(&mut self, data: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::EmptyInput("empty training set".into()));
        }
        for (window, _) in data {
            self.check_window(window)?;
        }
        let config = self.config.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x7261_696e);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut velocity = Gradients::zeros(self);
        let mut curve = Vec::with_capacity(config.epochs);

        for epoch in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(config.batch_size) {
                let mut batch = Gradients::zeros(self);
                let inv = 1.0 / chunk.len() as f64;
                for &idx in chunk {
                    let (window, target) = &data[idx];
                    let (tape, forecast) = self.forward_full(window)?;
                    let err = forecast - target;
                    epoch_loss += err * err;
                    let grads = self.backward(&tape, 2.0 * err * inv)?;
                    batch.add_scaled(&grads, 1.0);
                }
                velocity.scale(config.sgd_momentum);
                velocity.add_scaled(&batch, 1.0);
                self.apply_update(&velocity, -config.learning_rate);
            }
            epoch_loss /= data.len() as f64;
            if !epoch_loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            curve.push(epoch_loss);
        }
        Ok(curve)
    }

    // Flattened parameter view; order must match `assign_flat` and
    // `Gradients::flat`.
    fn flat_params(&self) -> Vec<(Block, f64)> {
        let mut out = Vec::new();
        flatten_mlp(&self.mlp, &mut out);
        flatten_attention(
            &self.attention.wq,
            &self.attention.wk,
            &self.attention.wv,
            &self.attention.wo,
            self.attention.bo,
            &mut out,
        );
        for &l in &self.decompose_logits {
            out.push((Block::Decompose, l));
        }
        out.push((Block::Revin, self.revin.scale));
        out.push((Block::Revin, self.revin.shift));
        out
    }

    fn assign_flat(&mut self, values: &[f64]) {
        let mut it = values.iter().copied();
        let mut next = || it.next().expect("flat parameter length mismatch");
        for row in &mut self.mlp.w1 {
            for w in row {
                *w = next();
            }
        }
        for b in &mut self.mlp.b1 {
            *b = next();
        }
        for row in &mut self.mlp.w2 {
            for w in row {
                *w = next();
            }
        }
        for b in &mut self.mlp.b2 {
            *b = next();
        }
        for w in &mut self.mlp.w3 {
            *w = next();
        }
        self.mlp.b3 = next();
        for side in [
            &mut self.attention.wq,
            &mut self.attention.wk,
            &mut self.attention.wv,
            &mut self.attention.wo,
        ] {
            for w in side.iter_mut() {
                *w = next();
            }
        }
        self.attention.bo = next();
        for l in &mut self.decompose_logits {
            *l = next();
        }
        self.revin.scale = next();
        self.revin.shift = next();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Mlp,
    Attention,
    Decompose,
    Revin,
}

fn flatten_mlp(mlp: &MlpParams, out: &mut Vec<(Block, f64)>) {
    for row in &mlp.w1 {
        out.extend(row.iter().map(|&w| (Block::Mlp, w)));
    }
    out.extend(mlp.b1.iter().map(|&b| (Block::Mlp, b)));
    for row in &mlp.w2 {
        out.extend(row.iter().map(|&w| (Block::Mlp, w)));
    }
    out.extend(mlp.b2.iter().map(|&b| (Block::Mlp, b)));
    out.extend(mlp.w3.iter().map(|&w| (Block::Mlp, w)));
    out.push((Block::Mlp, mlp.b3));
}

fn flatten_attention(
    wq: &[f64],
    wk: &[f64],
    wv: &[f64],
    wo: &[f64],
    bo: f64,
    out: &mut Vec<(Block, f64)>,
) {
    for side in [wq, wk, wv, wo] {
        out.extend(side.iter().map(|&w| (Block::Attention, w)));
    }
    out.push((Block::Attention, bo));
}

impl Gradients {
    fn flat(&self) -> Vec<(Block, f64)> {
        let mut out = Vec::new();
        flatten_mlp(&self.mlp, &mut out);
        flatten_attention(
            &self.attention.wq,
            &self.attention.wk,
            &self.attention.wv,
            &self.attention.wo,
            self.attention.bo,
            &mut out,
        );
        for &l in &self.logits {
            out.push((Block::Decompose, l));
        }
        out.push((Block::Revin, self.revin_scale));
        out.push((Block::Revin, self.revin_shift));
        out
    }
}

/// Per-block maximum relative gradient errors from [`gradient_check`].
#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub mlp: f64,
    pub attention: f64,
    pub decompose: f64,
    pub revin: f64,
}

impl GradCheckReport {
    pub fn max(&self) -> f64 {
        self.mlp.max(self.attention).max(self.decompose).max(self.revin)
    }
}

const FD_STEP: f64 = 1e-5;

/// Compare analytic loss gradients against central finite differences for
/// every parameter.
///
/// The relative error denominator is floored at 1e-4 so parameters whose
/// true gradient sits at the finite-difference noise floor do not produce
/// spurious blow-ups; real backpropagation defects surface as errors near 1.
pub fn gradient_check(model: &ForecastModel, window: &[f64], target: f64) -> Result<GradCheckReport> {
    let (analytic, _) = model.sample_gradients(window, target)?;
    let analytic = analytic.flat();

    let base: Vec<f64> = model.flat_params().iter().map(|(_, v)| *v).collect();
    let blocks: Vec<Block> = model.flat_params().iter().map(|(b, _)| *b).collect();
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        mlp: 0.0,
        attention: 0.0,
        decompose: 0.0,
        revin: 0.0,
    };

    let mut values = base.clone();
    for i in 0..values.len() {
        values[i] = base[i] + FD_STEP;
        probe.assign_flat(&values);
        let plus = probe.sample_loss(window, target)?;
        values[i] = base[i] - FD_STEP;
        probe.assign_flat(&values);
        let minus = probe.sample_loss(window, target)?;
        values[i] = base[i];

        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let a = analytic[i].1;
        let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-4);
        let slot = match blocks[i] {
            Block::Mlp => &mut report.mlp,
            Block::Attention => &mut report.attention,
            Block::Decompose => &mut report.decompose,
            Block::Revin => &mut report.revin,
        };
        *slot = slot.max(err);
    }
    Ok(report)
}

/// `(window, next value)` pairs from a series, full windows only.
pub fn training_windows(series: &[f64], window: usize, stride: usize) -> Vec<(Vec<f64>, f64)> {
    let stride = stride.max(1);
    let mut out = Vec::new();
    if series.len() <= window {
        return out;
    }
    let mut start = 0;
    while start + window < series.len() {
        out.push((
            series[start..start + window].to_vec(),
            series[start + window],
        ));
        start += stride;
    }
    out
}

/// History window ending at `end` inclusive, left-padded with the earliest
/// observed value until `window` long.
pub fn padded_window(series: &[f64], end: usize, window: usize) -> Vec<f64> {
    let take = (end + 1).min(window);
    let head = window - take;
    let mut out = Vec::with_capacity(window);
    out.extend(std::iter::repeat(series[0]).take(head));
    out.extend_from_slice(&series[end + 1 - take..=end]);
    out
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: ForecastModel,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// Serialize a model to versioned JSON; byte-stable for identical models.
pub fn save_model<P: AsRef<Path>>(model: &ForecastModel, path: P) -> Result<()> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let body = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    fs::write(path.as_ref(), body)?;
    Ok(())
}

/// Load a model saved by [`save_model`].
pub fn load_model<P: AsRef<Path>>(path: P) -> Result<ForecastModel> {
    let body = fs::read_to_string(path.as_ref())?;
    let probe: VersionProbe =
        serde_json::from_str(&body).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if probe.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelVersion {
            found: probe.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_str(&body).map_err(|e| Error::CorruptModel(e.to_string()))?;
    file.model.config.validate()?;
    Ok(file.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> TrainConfig {
        TrainConfig {
            window: 8,
            hidden: 4,
            key_dim: 3,
            attention_levels: 2,
            kernel_sizes: vec![3, 5],
            learning_rate: 0.05,
            epochs: 5,
            batch_size: 4,
            seed: 42,
            sgd_momentum: 0.0,
        }
    }

    fn random_window(seed: u64, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn forecast_is_sum_of_heads() {
        let model = ForecastModel::init(&small_config()).unwrap();
        let window = random_window(1, 8);
        let (trend, seasonal) = model.forecast_parts(&window).unwrap();
        let total = model.forecast_next(&window).unwrap();
        assert_eq!(total, trend + seasonal);
    }

    #[test]
    fn zeroed_heads_forecast_constant_trend_only() {
        let mut model = ForecastModel::init(&small_config()).unwrap();
        model.mlp = MlpParams::zeros(8, 4);
        model.attention.wv.iter_mut().for_each(|v| *v = 0.0);
        model.attention.bo = 0.0;
        // MLP output 0 denormalizes to mean - shift/scale * sd; with the
        // default affine (scale 1, shift 0) that is the window mean.
        model.revin = RevinParams::default();
        let window = vec![2.0; 8];
        let forecast = model.forecast_next(&window).unwrap();
        assert!((forecast - 2.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_check_small_models() {
        for seed in 0..5u64 {
            let mut config = small_config();
            config.seed = seed;
            let model = ForecastModel::init(&config).unwrap();
            let window = random_window(seed + 100, 8);
            let target = random_window(seed + 200, 1)[0];
            let report = gradient_check(&model, &window, target).unwrap();
            assert!(
                report.max() < 1e-4,
                "seed {seed}: gradcheck {report:?}"
            );
        }
    }

    #[test]
    fn gradient_check_zero_model_zero_input() {
        let mut model = ForecastModel::init(&small_config()).unwrap();
        model.mlp = MlpParams::zeros(8, 4);
        for side in [
            &mut model.attention.wq,
            &mut model.attention.wk,
            &mut model.attention.wv,
            &mut model.attention.wo,
        ] {
            side.iter_mut().for_each(|v| *v = 0.0);
        }
        model.attention.bo = 0.0;
        let window = vec![0.0; 8];
        let (grads, _) = model.sample_gradients(&window, 0.0).unwrap();
        // Zero input and zero target: forecast 0, loss 0, all gradients 0.
        assert!(grads.flat().iter().all(|(_, g)| *g == 0.0));
    }

    #[test]
    fn training_is_deterministic() {
        let config = small_config();
        let data: Vec<(Vec<f64>, f64)> = (0..10)
            .map(|i| (random_window(i, 8), random_window(i + 50, 1)[0]))
            .collect();
        let mut a = ForecastModel::init(&config).unwrap();
        let mut b = ForecastModel::init(&config).unwrap();
        let curve_a = a.train(&data).unwrap();
        let curve_b = b.train(&data).unwrap();
        assert_eq!(curve_a, curve_b);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let mut config = small_config();
        config.learning_rate = f64::MIN_POSITIVE;
        let data = vec![(random_window(3, 8), 0.5)];
        let mut model = ForecastModel::init(&config).unwrap();
        let before = model.clone();
        // A denormalized learning rate is effectively zero for f64 updates.
        model.train(&data).unwrap();
        let drift: f64 = model
            .flat_params()
            .iter()
            .zip(before.flat_params())
            .map(|((_, a), (_, b))| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-300);
    }

    #[test]
    fn constant_series_fit_converges_to_constant() {
        let mut config = small_config();
        config.epochs = 60;
        config.learning_rate = 0.05;
        let mut model = ForecastModel::init(&config).unwrap();
        let data: Vec<(Vec<f64>, f64)> = (0..6).map(|_| (vec![1.5; 8], 1.5)).collect();
        let curve = model.train(&data).unwrap();
        assert!(curve.last().unwrap() < &1e-4, "loss {:?}", curve.last());
        let forecast = model.forecast_next(&vec![1.5; 8]).unwrap();
        assert!((forecast - 1.5).abs() < 1e-2);
    }

    #[test]
    fn ramp_fit_beats_variance_floor() {
        let mut config = small_config();
        config.epochs = 80;
        config.learning_rate = 0.03;
        config.sgd_momentum = 0.5;
        let series: Vec<f64> = (0..60).map(|t| 0.1 * t as f64 - 2.0).collect();
        let data = training_windows(&series, 8, 1);
        let mut model = ForecastModel::init(&config).unwrap();
        model.train(&data).unwrap();
        let targets: Vec<f64> = data.iter().map(|(_, y)| *y).collect();
        let mean = targets.iter().sum::<f64>() / targets.len() as f64;
        let variance =
            targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / targets.len() as f64;
        let mse: f64 = data
            .iter()
            .map(|(w, y)| model.sample_loss(w, *y).unwrap())
            .sum::<f64>()
            / data.len() as f64;
        assert!(mse < 0.01 * variance, "mse {mse} vs variance {variance}");
    }

    #[test]
    fn divergence_reports_epoch() {
        let mut config = small_config();
        config.learning_rate = 1e12;
        config.epochs = 10;
        let data: Vec<(Vec<f64>, f64)> = (0..8)
            .map(|i| (random_window(i, 8), 100.0))
            .collect();
        let mut model = ForecastModel::init(&config).unwrap();
        match model.train(&data) {
            Err(Error::Divergence { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("model_a.json");
        let path_b = dir.path().join("model_b.json");
        let model = ForecastModel::init(&small_config()).unwrap();
        save_model(&model, &path_a).unwrap();
        let loaded = load_model(&path_a).unwrap();
        assert_eq!(model, loaded);
        save_model(&loaded, &path_b).unwrap();
        assert_eq!(fs::read(&path_a).unwrap(), fs::read(&path_b).unwrap());

        let window = random_window(9, 8);
        assert_eq!(
            model.forecast_next(&window).unwrap(),
            loaded.forecast_next(&window).unwrap()
        );
    }

    #[test]
    fn truncated_model_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = ForecastModel::init(&small_config()).unwrap();
        save_model(&model, &path).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        fs::write(&path, &body[..body.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::CorruptModel(_))));
    }

    #[test]
    fn version_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = ForecastModel::init(&small_config()).unwrap();
        save_model(&model, &path).unwrap();
        let body = fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 9");
        fs::write(&path, body).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(Error::ModelVersion { found: 9, .. })
        ));
    }

    #[test]
    fn padded_window_repeats_earliest_value() {
        let series = [3.0, 4.0, 5.0, 6.0];
        assert_eq!(padded_window(&series, 1, 4), vec![3.0, 3.0, 3.0, 4.0]);
        assert_eq!(padded_window(&series, 3, 4), vec![3.0, 4.0, 5.0, 6.0]);
        assert_eq!(padded_window(&series, 3, 2), vec![5.0, 6.0]);
    }

    #[test]
    fn training_windows_pair_next_values() {
        let series = [1.0, 2.0, 3.0, 4.0, 5.0];
        let data = training_windows(&series, 3, 1);
        assert_eq!(data.len(), 2);
        assert_eq!(data[0], (vec![1.0, 2.0, 3.0], 4.0));
        assert_eq!(data[1], (vec![2.0, 3.0, 4.0], 5.0));
    }
}
