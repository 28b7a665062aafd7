//! Local linear scaling approximation: jump detection in wavelet
//! coefficients and jump-preserving reconstruction.
//!
//! Jumps are located at the coarsest scale as the largest-magnitude
//! coefficient above a MAD-based noise threshold, given an extent from the
//! sign structure of the surrounding coefficients, then refined scale by
//! scale down to the finest level. Reconstruction keeps detail coefficients
//! inside the jump regions, zeroes the rest at the refined levels, and
//! inverts the transform, so abrupt shifts survive while off-jump detail is
//! suppressed.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::MultivariateSeries;
use crate::error::{Error, Result};
use crate::modwt::{modwt_forward, modwt_inverse, WaveletDecomposition, WaveletFilter};

/// Detection and refinement settings.
#[derive(Debug, Clone)]
pub struct ChangePointConfig {
    /// Coarsest scale `J` used for detection.
    pub top_level: usize,
    /// Refinement depth: scales `J - depth ..= J` are refined and masked.
    /// `None` refines all the way down to level 1.
    pub refine_depth: Option<usize>,
    /// Detection stops after this many jumps per column.
    pub max_jumps: usize,
    /// Threshold in multiples of the MAD noise scale of the level-J band.
    pub threshold: f64,
}

impl Default for ChangePointConfig {
    fn default() -> Self {
        Self {
            top_level: 4,
            refine_depth: None,
            max_jumps: 10,
            threshold: 3.0,
        }
    }
}

impl ChangePointConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_level < 1 {
            return Err(Error::Config("top_level must be at least 1".into()));
        }
        if self.max_jumps < 1 {
            return Err(Error::Config("max_jumps must be at least 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config("threshold must be positive".into()));
        }
        if let Some(depth) = self.refine_depth {
            if depth > self.top_level {
                return Err(Error::Config(format!(
                    "refine_depth {depth} exceeds top_level {}",
                    self.top_level
                )));
            }
        }
        Ok(())
    }

    /// Effective refinement depth for a given top level.
    pub fn depth(&self) -> usize {
        self.refine_depth.unwrap_or(self.top_level - 1)
    }
}

/// One detected jump: location, extent, and flank sign-change counts at one
/// scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JumpRegion {
    /// Scale the region lives at (1 = finest).
    pub level: usize,
    /// Coefficient index of the jump peak.
    pub location: usize,
    /// Left edge of the jump range.
    pub alpha: usize,
    /// Right edge of the jump range.
    pub beta: usize,
    /// Sign changes over the left flank of the peak within the support.
    pub n_alpha: usize,
    /// Sign changes over the right flank.
    pub n_beta: usize,
    /// Set when a refinement window held no usable coefficient and the
    /// parent region was kept instead.
    pub refinement_miss: bool,
}

impl JumpRegion {
    pub fn contains(&self, t: usize) -> bool {
        self.alpha <= t && t <= self.beta
    }

    pub fn width(&self) -> usize {
        self.beta - self.alpha + 1
    }
}

/// A jump-preserving reconstruction of a multivariate series.
#[derive(Debug, Clone)]
pub struct ReconstructedSeries {
    pub values: MultivariateSeries,
    /// Detected regions per column, all refined scales included.
    pub regions: Vec<Vec<JumpRegion>>,
    pub config: ChangePointConfig,
}

// sign with sign(0) = +1, so zero runs never flip.
fn sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// Number of level-`level` coefficients affected by the circular boundary
/// for a filter of `filter_len` taps: `(L - 1)(2^j - 1)`. Peak detection
/// skips them, since the wrap-around of a non-periodic series produces a
/// spurious jump response there.
pub fn boundary_len(filter_len: usize, level: usize) -> usize {
    (filter_len - 1) * ((1usize << level) - 1)
}

/// Robust noise scale: MAD / 0.6745.
pub fn mad_noise_scale(w: &[f64]) -> f64 {
    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            return 0.0;
        }
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
    let med = median(w.to_vec());
    let deviations: Vec<f64> = w.iter().map(|v| (v - med).abs()).collect();
    median(deviations) / 0.6745
}

// Count sign flips between consecutive coefficients over `range` (pairs
// (t, t+1) with both ends inside the range).
fn flip_count(w: &[f64], lo: usize, hi: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    (lo..hi)
        .filter(|&t| sign(w[t]) != sign(w[t + 1]))
        .count()
}

// Extent of the jump at `l` inside `[lo, hi]`: the maximal run of
// like-signed non-zero coefficients around the peak (zeros lie outside the
// support and end the run). The flank sign-flip totals are recorded
// alongside.
fn region_around(w: &[f64], l: usize, lo: usize, hi: usize, level: usize) -> JumpRegion {
    let support_min = (lo..=hi).find(|&t| w[t] != 0.0).unwrap_or(l);
    let support_max = (lo..=hi).rev().find(|&t| w[t] != 0.0).unwrap_or(l);
    let peak_sign = sign(w[l]);

    let mut alpha = l;
    while alpha > support_min && w[alpha - 1] != 0.0 && sign(w[alpha - 1]) == peak_sign {
        alpha -= 1;
    }
    let mut beta = l;
    while beta < support_max && w[beta + 1] != 0.0 && sign(w[beta + 1]) == peak_sign {
        beta += 1;
    }

    let n_alpha = if l > support_min {
        flip_count(w, support_min, l - 1)
    } else {
        0
    };
    let n_beta = if l < support_max {
        flip_count(w, l + 1, support_max)
    } else {
        0
    };

    JumpRegion {
        level,
        location: l,
        alpha,
        beta,
        n_alpha,
        n_beta,
        refinement_miss: false,
    }
}

fn argmax_abs<I: Iterator<Item = usize>>(w: &[f64], candidates: I) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for t in candidates {
        let mag = w[t].abs();
        match best {
            Some((_, b)) if b >= mag => {}
            _ => best = Some((t, mag)),
        }
    }
    best
}

/// Locate the dominant jump in a coefficient vector.
///
/// The peak is the largest-magnitude non-boundary coefficient; detection
/// fails with [`Error::NoJumpFound`] when that magnitude is zero or falls
/// below `threshold * mad_noise_scale(w)`.
pub fn detect_first_jump(
    w: &[f64],
    level: usize,
    filter: &WaveletFilter,
    threshold: f64,
) -> Result<JumpRegion> {
    detect_kth_jump(w, level, filter, threshold, &[])
}

/// Locate the next jump outside all previously detected regions.
///
/// The peak search and the extent scan are both restricted to the
/// contiguous unexcluded gap containing the new peak.
pub fn detect_kth_jump(
    w: &[f64],
    level: usize,
    filter: &WaveletFilter,
    threshold: f64,
    excluded: &[JumpRegion],
) -> Result<JumpRegion> {
    if w.is_empty() {
        return Err(Error::EmptyInput("empty coefficient vector".into()));
    }
    let n = w.len();
    let skip = boundary_len(filter.len(), level);
    let start = if skip < n { skip } else { 0 };
    let is_free = |t: usize| !excluded.iter().any(|r| r.contains(t));
    let noise = mad_noise_scale(w);
    let floor = threshold * noise;

    let Some((l, mag)) = argmax_abs(w, (start..n).filter(|&t| is_free(t))) else {
        return Err(Error::NoJumpFound);
    };
    if mag == 0.0 || mag < floor {
        return Err(Error::NoJumpFound);
    }

    // Bounds of the unexcluded gap around the peak.
    let mut lo = l;
    while lo > 0 && is_free(lo - 1) {
        lo -= 1;
    }
    let mut hi = l;
    while hi + 1 < n && is_free(hi + 1) {
        hi += 1;
    }
    Ok(region_around(w, l, lo, hi, level))
}

/// Carry a top-level region down the scales per the refinement rule: at each
/// finer level the peak is the largest coefficient inside the parent region,
/// with a fresh extent computed at that level.
///
/// Returns the chain from level `J` down to `J - depth`. With `depth = 0`
/// only the top-level region is returned. A window with no usable
/// coefficient keeps the parent bounds and marks `refinement_miss`.
pub fn refine_across_scales(
    d: &WaveletDecomposition,
    region: &JumpRegion,
    depth: usize,
) -> Result<Vec<JumpRegion>> {
    let top = region.level;
    if top > d.levels() {
        return Err(Error::LevelOutOfRange {
            level: top,
            max: d.levels(),
        });
    }
    if depth >= top {
        return Err(Error::Config(format!(
            "refinement depth {depth} must stay above level 0 (top level {top})"
        )));
    }
    let mut chain = vec![region.clone()];
    let mut parent = region.clone();
    for level in (top - depth..top).rev() {
        let w = &d.details[level - 1];
        let skip = boundary_len(d.filter.len(), level);
        let start = if skip < w.len() { skip } else { 0 };
        let window = parent.alpha.max(start)..=parent.beta;
        let refined = match argmax_abs(w, window) {
            Some((l, mag)) if mag > 0.0 => region_around(w, l, parent.alpha, parent.beta, level),
            _ => JumpRegion {
                level,
                refinement_miss: true,
                ..parent.clone()
            },
        };
        chain.push(refined.clone());
        parent = refined;
    }
    Ok(chain)
}

/// Detection outcome for one column.
#[derive(Debug, Clone)]
struct ColumnDetection {
    /// Refinement chains, one per detected jump.
    chains: Vec<Vec<JumpRegion>>,
}

fn detect_column(
    column: &[f64],
    config: &ChangePointConfig,
    filter: &WaveletFilter,
) -> Result<(WaveletDecomposition, ColumnDetection)> {
    let d = modwt_forward(column, filter, config.top_level)?;
    let top = config.top_level;
    let w_top = &d.details[top - 1];
    let mut tops: Vec<JumpRegion> = Vec::new();
    while tops.len() < config.max_jumps {
        match detect_kth_jump(w_top, top, filter, config.threshold, &tops) {
            Ok(region) => tops.push(region),
            Err(Error::NoJumpFound) => break,
            Err(other) => return Err(other),
        }
    }
    let chains = tops
        .iter()
        .map(|region| refine_across_scales(&d, region, config.depth()))
        .collect::<Result<Vec<_>>>()?;
    Ok((d, ColumnDetection { chains }))
}

fn reconstruct_column(
    d: &WaveletDecomposition,
    detection: &ColumnDetection,
    config: &ChangePointConfig,
    column: &[f64],
) -> Result<Vec<f64>> {
    if detection.chains.is_empty() {
        // Jump-free: nothing altered, the column passes through.
        return Ok(column.to_vec());
    }
    let top = config.top_level;
    let mut masked = d.clone();
    for level in (top - config.depth())..=top {
        let keep: Vec<&JumpRegion> = detection
            .chains
            .iter()
            .flatten()
            .filter(|r| r.level == level)
            .collect();
        let w = &mut masked.details[level - 1];
        for t in 0..w.len() {
            if !keep.iter().any(|r| r.contains(t)) {
                w[t] = 0.0;
            }
        }
    }
    modwt_inverse(&masked)
}

/// Run detection on one scalar series and return the refinement chains,
/// finest level first within each chain's ordering as produced by
/// [`refine_across_scales`].
pub fn detect_series(
    column: &[f64],
    config: &ChangePointConfig,
    filter: &WaveletFilter,
) -> Result<Vec<Vec<JumpRegion>>> {
    config.validate()?;
    let (_, detection) = detect_column(column, config, filter)?;
    Ok(detection.chains)
}

/// Jump-preserving reconstruction of every column of `x`.
///
/// Columns are independent; jump-free columns pass through unchanged.
pub fn reconstruct(
    x: &MultivariateSeries,
    config: &ChangePointConfig,
    filter: &WaveletFilter,
) -> Result<ReconstructedSeries> {
    config.validate()?;
    let columns: Vec<Vec<f64>> = (0..x.width()).map(|d| x.column(d)).collect();
    let results: Vec<Result<(Vec<f64>, Vec<JumpRegion>)>> = columns
        .par_iter()
        .map(|column| {
            let (d, detection) = detect_column(column, config, filter)?;
            let rebuilt = reconstruct_column(&d, &detection, config, column)?;
            let regions = detection.chains.into_iter().flatten().collect();
            Ok((rebuilt, regions))
        })
        .collect();

    let mut rebuilt_columns = Vec::with_capacity(x.width());
    let mut regions = Vec::with_capacity(x.width());
    for r in results {
        let (col, regs) = r?;
        rebuilt_columns.push(col);
        regions.push(regs);
    }

    let t = x.len();
    let values: Vec<Vec<f64>> = (0..t)
        .map(|row| rebuilt_columns.iter().map(|col| col[row]).collect())
        .collect();
    let values = MultivariateSeries::new(
        values,
        x.time_index().to_vec(),
        x.variable_names().to_vec(),
    )?;
    Ok(ReconstructedSeries {
        values,
        regions,
        config: config.clone(),
    })
}
