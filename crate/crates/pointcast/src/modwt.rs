//! Maximal-overlap discrete wavelet transform.
//!
//! Non-decimated pyramid transform with circular boundary handling: every
//! detail vector keeps the source length, and analysis followed by synthesis
//! reconstructs the input to floating-point precision. The analysis operator
//! is an isometry (the energy of the coefficients equals the energy of the
//! signal), which also makes synthesis the exact adjoint of analysis — a
//! property the forecasting heads rely on for backpropagation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Orthonormal-family wavelet filter pair.
///
/// `scaling` holds the low-pass taps `g` with DC gain `sqrt(2)`; `wavelet`
/// holds the high-pass taps `h` with zero sum, related by the quadrature
/// mirror rule `h[l] = (-1)^l g[L-1-l]`. The transform rescales both by
/// `1/sqrt(2)` internally, as the non-decimated pyramid requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletFilter {
    name: String,
    scaling: Vec<f64>,
    wavelet: Vec<f64>,
}

impl WaveletFilter {
    /// Haar filter: the default, and the sharpest choice for localizing jumps.
    pub fn haar() -> Self {
        let g = vec![1.0 / SQRT_2, 1.0 / SQRT_2];
        Self::from_scaling("haar", g)
    }

    /// Daubechies filter with four taps and two vanishing moments.
    pub fn daubechies4() -> Self {
        let s3 = 3.0_f64.sqrt();
        let norm = 4.0 * SQRT_2;
        let g = vec![
            (1.0 + s3) / norm,
            (3.0 + s3) / norm,
            (3.0 - s3) / norm,
            (1.0 - s3) / norm,
        ];
        Self::from_scaling("db4", g)
    }

    /// Look a filter up by name (`haar` or `db4`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "haar" => Ok(Self::haar()),
            "db4" | "daubechies4" => Ok(Self::daubechies4()),
            other => Err(Error::Config(format!("unknown wavelet filter `{other}`"))),
        }
    }

    fn from_scaling(name: &str, scaling: Vec<f64>) -> Self {
        let len = scaling.len();
        let wavelet = (0..len)
            .map(|l| {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                sign * scaling[len - 1 - l]
            })
            .collect();
        Self {
            name: name.to_string(),
            scaling,
            wavelet,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of taps.
    pub fn len(&self) -> usize {
        self.scaling.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaling.is_empty()
    }

    pub fn scaling_taps(&self) -> &[f64] {
        &self.scaling
    }

    pub fn wavelet_taps(&self) -> &[f64] {
        &self.wavelet
    }
}

/// Full coefficient pyramid for one series: `J` detail vectors plus the
/// final smooth, each of the source length.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub details: Vec<Vec<f64>>,
    pub smooth: Vec<f64>,
    pub filter: WaveletFilter,
}

impl WaveletDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn source_length(&self) -> usize {
        self.smooth.len()
    }

    fn check_consistent(&self) -> Result<()> {
        let t = self.smooth.len();
        for (j, w) in self.details.iter().enumerate() {
            if w.len() != t {
                return Err(Error::Shape {
                    expected: format!("level {} detail of length {t}", j + 1),
                    got: format!("length {}", w.len()),
                });
            }
        }
        Ok(())
    }

    /// Dump the coefficients as CSV with columns `t, W_1..W_J, V_J`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "t")?;
        for j in 1..=self.levels() {
            write!(out, ",W_{j}")?;
        }
        writeln!(out, ",V_{}", self.levels())?;
        for t in 0..self.source_length() {
            write!(out, "{t}")?;
            for w in &self.details {
                write!(out, ",{}", w[t])?;
            }
            writeln!(out, ",{}", self.smooth[t])?;
        }
        Ok(())
    }
}

/// Sensible level count for a series of length `t`: `floor(log2 t)` capped
/// at 4, since deeper scales exceed useful support on match-length series.
pub fn default_levels(t: usize) -> usize {
    let mut levels = 0usize;
    let mut span = 1usize;
    while span * 2 <= t {
        span *= 2;
        levels += 1;
    }
    levels.clamp(1, 4)
}

// One analysis step: circular convolution of `input` with the rescaled taps
// upsampled by `stride`, writing the detail and the next smooth.
fn analysis_step(
    input: &[f64],
    filter: &WaveletFilter,
    stride: usize,
    detail: &mut [f64],
    smooth: &mut [f64],
) {
    let n = input.len();
    for t in 0..n {
        let mut w = 0.0;
        let mut v = 0.0;
        let mut idx = t;
        for l in 0..filter.len() {
            if l > 0 {
                idx = (idx + n - stride % n) % n;
            }
            let x = input[idx];
            w += filter.wavelet[l] / SQRT_2 * x;
            v += filter.scaling[l] / SQRT_2 * x;
        }
        detail[t] = w;
        smooth[t] = v;
    }
}

// One synthesis step, the adjoint of `analysis_step`: recombines a detail
// and smooth pair into the coarser-by-one smooth.
fn synthesis_step(
    detail: &[f64],
    smooth: &[f64],
    filter: &WaveletFilter,
    stride: usize,
    out: &mut [f64],
) {
    let n = out.len();
    for t in 0..n {
        let mut acc = 0.0;
        let mut idx = t;
        for l in 0..filter.len() {
            if l > 0 {
                idx = (idx + stride) % n;
            }
            acc += filter.wavelet[l] / SQRT_2 * detail[idx];
            acc += filter.scaling[l] / SQRT_2 * smooth[idx];
        }
        out[t] = acc;
    }
}

/// Forward transform of `x` down to `levels` scales.
pub fn modwt_forward(
    x: &[f64],
    filter: &WaveletFilter,
    levels: usize,
) -> Result<WaveletDecomposition> {
    if levels < 1 {
        return Err(Error::Config("modwt requires at least one level".into()));
    }
    let t = x.len();
    if t < 2 {
        return Err(Error::Config(format!(
            "modwt requires a series of length >= 2, got {t}"
        )));
    }
    if t < filter.len() << (levels - 1) {
        log::warn!(
            "series length {t} is below the level-{levels} filter span {}; \
             boundary wrap-around will dominate the coarsest scale",
            filter.len() << (levels - 1)
        );
    }
    let mut details = Vec::with_capacity(levels);
    let mut current = x.to_vec();
    let mut smooth = vec![0.0; t];
    for j in 1..=levels {
        let mut detail = vec![0.0; t];
        analysis_step(&current, filter, 1 << (j - 1), &mut detail, &mut smooth);
        details.push(detail);
        current.copy_from_slice(&smooth);
    }
    Ok(WaveletDecomposition {
        details,
        smooth,
        filter: filter.clone(),
    })
}

/// Exact inverse of [`modwt_forward`].
pub fn modwt_inverse(d: &WaveletDecomposition) -> Result<Vec<f64>> {
    d.check_consistent()?;
    let t = d.source_length();
    let mut current = d.smooth.clone();
    let mut out = vec![0.0; t];
    for j in (1..=d.levels()).rev() {
        synthesis_step(
            &d.details[j - 1],
            &current,
            &d.filter,
            1 << (j - 1),
            &mut out,
        );
        std::mem::swap(&mut current, &mut out);
    }
    Ok(current)
}

/// The level-`level` detail series `D_j`, i.e. the synthesis of the pyramid
/// with every other band zeroed. Details and the smooth sum back to the
/// source: `x = sum_j D_j + S_J`.
pub fn detail_reconstruct(d: &WaveletDecomposition, level: usize) -> Result<Vec<f64>> {
    if level < 1 || level > d.levels() {
        return Err(Error::LevelOutOfRange {
            level,
            max: d.levels(),
        });
    }
    let mut masked = d.clone();
    for (j, w) in masked.details.iter_mut().enumerate() {
        if j + 1 != level {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    masked.smooth.iter_mut().for_each(|v| *v = 0.0);
    modwt_inverse(&masked)
}

/// The smooth series `S_J`: synthesis with every detail band zeroed.
pub fn smooth_reconstruct(d: &WaveletDecomposition) -> Result<Vec<f64>> {
    let mut masked = d.clone();
    for w in masked.details.iter_mut() {
        w.iter_mut().for_each(|v| *v = 0.0);
    }
    modwt_inverse(&masked)
}

/// A copy of the decomposition with the level-`level` detail replaced.
pub fn replace_details(
    d: &WaveletDecomposition,
    level: usize,
    new_w: &[f64],
) -> Result<WaveletDecomposition> {
    if level < 1 || level > d.levels() {
        return Err(Error::LevelOutOfRange {
            level,
            max: d.levels(),
        });
    }
    if new_w.len() != d.source_length() {
        return Err(Error::Shape {
            expected: format!("detail of length {}", d.source_length()),
            got: format!("length {}", new_w.len()),
        });
    }
    let mut out = d.clone();
    out.details[level - 1] = new_w.to_vec();
    Ok(out)
}
