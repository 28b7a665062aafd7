//! Wavelet attention over the seasonal window.
//!
//! The window is lifted to `key_dim` channels by per-step query/key/value
//! projections; each projection is wavelet-decomposed along time, scaled
//! dot-product attention runs independently per scale band, and the
//! per-band outputs are recombined by the inverse transform before a final
//! projection reads off the last position.
//!
//! Backpropagation leans on the transform being an isometry: synthesis is
//! the exact adjoint of analysis, so gradients cross the wavelet stage by
//! applying the opposite transform.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::softmax;
use crate::error::{Error, Result};
use crate::modwt::{modwt_forward, modwt_inverse, WaveletDecomposition, WaveletFilter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletAttentionParams {
    /// Per-step projections of the scalar window into `key_dim` channels.
    pub wq: Vec<f64>,
    pub wk: Vec<f64>,
    pub wv: Vec<f64>,
    /// Output projection reading the last position back to a scalar.
    pub wo: Vec<f64>,
    pub bo: f64,
    /// Transform depth inside the attention; 0 skips the wavelet split.
    pub levels: usize,
    pub filter: WaveletFilter,
}

/// Gradients for the learnable attention parameters.
#[derive(Debug, Clone)]
pub struct AttentionGrads {
    pub wq: Vec<f64>,
    pub wk: Vec<f64>,
    pub wv: Vec<f64>,
    pub wo: Vec<f64>,
    pub bo: f64,
}

impl AttentionGrads {
    pub fn zeros(key_dim: usize) -> Self {
        Self {
            wq: vec![0.0; key_dim],
            wk: vec![0.0; key_dim],
            wv: vec![0.0; key_dim],
            wo: vec![0.0; key_dim],
            bo: 0.0,
        }
    }

    pub(crate) fn add_scaled(&mut self, other: &AttentionGrads, factor: f64) {
        for (a, b) in self.wq.iter_mut().zip(&other.wq) {
            *a += factor * b;
        }
        for (a, b) in self.wk.iter_mut().zip(&other.wk) {
            *a += factor * b;
        }
        for (a, b) in self.wv.iter_mut().zip(&other.wv) {
            *a += factor * b;
        }
        for (a, b) in self.wo.iter_mut().zip(&other.wo) {
            *a += factor * b;
        }
        self.bo += factor * other.bo;
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.wq.iter_mut().for_each(|v| *v *= factor);
        self.wk.iter_mut().for_each(|v| *v *= factor);
        self.wv.iter_mut().for_each(|v| *v *= factor);
        self.wo.iter_mut().for_each(|v| *v *= factor);
        self.bo *= factor;
    }
}

// Band-major channel stacks: bands[b][c] is one length-L series.
type Bands = Vec<Vec<Vec<f64>>>;

#[derive(Debug, Clone)]
pub(crate) struct AttentionTape {
    q_bands: Bands,
    k_bands: Bands,
    v_bands: Bands,
    /// Row-softmaxed score matrices per band.
    attn: Vec<Vec<Vec<f64>>>,
    /// Channel-major recombined output.
    y: Vec<Vec<f64>>,
}

impl WaveletAttentionParams {
    pub fn zeros(key_dim: usize, levels: usize, filter: WaveletFilter) -> Self {
        Self {
            wq: vec![0.0; key_dim],
            wk: vec![0.0; key_dim],
            wv: vec![0.0; key_dim],
            wo: vec![0.0; key_dim],
            bo: 0.0,
            levels,
            filter,
        }
    }

    pub fn init<R: Rng>(key_dim: usize, levels: usize, filter: WaveletFilter, rng: &mut R) -> Self {
        let mut params = Self::zeros(key_dim, levels, filter);
        let a = 1.0 / (key_dim as f64).sqrt();
        for side in [&mut params.wq, &mut params.wk, &mut params.wv, &mut params.wo] {
            for w in side.iter_mut() {
                *w = rng.random_range(-a..a);
            }
        }
        params
    }

    pub fn key_dim(&self) -> usize {
        self.wq.len()
    }

    fn check_window(&self, window: &[f64]) -> Result<()> {
        if self.levels > 0 && window.len() < (1 << self.levels) {
            return Err(Error::Config(format!(
                "window of length {} too short for {} attention levels",
                window.len(),
                self.levels
            )));
        }
        if window.is_empty() {
            return Err(Error::EmptyInput("empty attention window".into()));
        }
        Ok(())
    }

    // Analysis of one channel stack into bands (details then smooth); the
    // identity when levels = 0.
    fn analyze(&self, channels: &[Vec<f64>]) -> Result<Bands> {
        if self.levels == 0 {
            return Ok(vec![channels.to_vec()]);
        }
        let mut bands: Bands = vec![Vec::with_capacity(channels.len()); self.levels + 1];
        for series in channels {
            let d = modwt_forward(series, &self.filter, self.levels)?;
            for (b, detail) in d.details.into_iter().enumerate() {
                bands[b].push(detail);
            }
            bands[self.levels].push(d.smooth);
        }
        Ok(bands)
    }

    // Synthesis of bands back to a channel stack; adjoint of `analyze`.
    fn synthesize(&self, bands: &Bands) -> Result<Vec<Vec<f64>>> {
        if self.levels == 0 {
            return Ok(bands[0].clone());
        }
        let channels = bands[0].len();
        let mut out = Vec::with_capacity(channels);
        for c in 0..channels {
            let d = WaveletDecomposition {
                details: (0..self.levels).map(|b| bands[b][c].clone()).collect(),
                smooth: bands[self.levels][c].clone(),
                filter: self.filter.clone(),
            };
            out.push(modwt_inverse(&d)?);
        }
        Ok(out)
    }

    fn project(&self, window: &[f64], weights: &[f64]) -> Vec<Vec<f64>> {
        weights
            .iter()
            .map(|&w| window.iter().map(|&x| x * w).collect())
            .collect()
    }

    pub fn forward(&self, window: &[f64]) -> Result<f64> {
        Ok(self.forward_tape(window)?.1)
    }

    pub(crate) fn forward_tape(&self, window: &[f64]) -> Result<(AttentionTape, f64)> {
        self.check_window(window)?;
        let len = window.len();
        let dk = self.key_dim();
        let scale = 1.0 / (dk as f64).sqrt();

        let q_bands = self.analyze(&self.project(window, &self.wq))?;
        let k_bands = self.analyze(&self.project(window, &self.wk))?;
        let v_bands = self.analyze(&self.project(window, &self.wv))?;

        let mut attn = Vec::with_capacity(q_bands.len());
        let mut o_bands: Bands = Vec::with_capacity(q_bands.len());
        for ((qb, kb), vb) in q_bands.iter().zip(&k_bands).zip(&v_bands) {
            let mut a = Vec::with_capacity(len);
            for r in 0..len {
                let scores: Vec<f64> = (0..len)
                    .map(|t| {
                        scale
                            * (0..dk)
                                .map(|c| qb[c][r] * kb[c][t])
                                .sum::<f64>()
                    })
                    .collect();
                a.push(softmax(&scores));
            }
            let mut ob = vec![vec![0.0; len]; dk];
            for c in 0..dk {
                for r in 0..len {
                    ob[c][r] = (0..len).map(|t| a[r][t] * vb[c][t]).sum();
                }
            }
            attn.push(a);
            o_bands.push(ob);
        }

        let y = self.synthesize(&o_bands)?;
        let out = self.bo
            + (0..dk)
                .map(|c| self.wo[c] * y[c][len - 1])
                .sum::<f64>();
        Ok((
            AttentionTape {
                q_bands,
                k_bands,
                v_bands,
                attn,
                y,
            },
            out,
        ))
    }

    /// Backpropagate `dy` through the head; returns parameter gradients and
    /// the window gradient.
    pub(crate) fn backward(
        &self,
        tape: &AttentionTape,
        window: &[f64],
        dy: f64,
    ) -> Result<(AttentionGrads, Vec<f64>)> {
        let len = window.len();
        let dk = self.key_dim();
        let scale = 1.0 / (dk as f64).sqrt();
        let mut grads = AttentionGrads::zeros(dk);

        grads.bo = dy;
        let mut d_y = vec![vec![0.0; len]; dk];
        for c in 0..dk {
            grads.wo[c] = dy * tape.y[c][len - 1];
            d_y[c][len - 1] = dy * self.wo[c];
        }

        // Synthesis adjoint: analyze the output gradient back into bands.
        let d_o_bands = self.analyze(&d_y)?;

        let n_bands = tape.q_bands.len();
        let mut d_q_bands: Bands = vec![vec![vec![0.0; len]; dk]; n_bands];
        let mut d_k_bands: Bands = vec![vec![vec![0.0; len]; dk]; n_bands];
        let mut d_v_bands: Bands = vec![vec![vec![0.0; len]; dk]; n_bands];

        for b in 0..n_bands {
            let a = &tape.attn[b];
            let qb = &tape.q_bands[b];
            let kb = &tape.k_bands[b];
            let vb = &tape.v_bands[b];
            let dob = &d_o_bands[b];

            for r in 0..len {
                // dA[r][t] = sum_c dO[c][r] * V[c][t]
                let da: Vec<f64> = (0..len)
                    .map(|t| (0..dk).map(|c| dob[c][r] * vb[c][t]).sum())
                    .collect();
                // Softmax row backward.
                let dot: f64 = da.iter().zip(&a[r]).map(|(x, y)| x * y).sum();
                for t in 0..len {
                    let ds = a[r][t] * (da[t] - dot);
                    let ds_scaled = ds * scale;
                    for c in 0..dk {
                        d_q_bands[b][c][r] += ds_scaled * kb[c][t];
                        d_k_bands[b][c][t] += ds_scaled * qb[c][r];
                    }
                }
                // dV[c][t] += A[r][t] * dO[c][r]
                for c in 0..dk {
                    let doc = dob[c][r];
                    if doc != 0.0 {
                        for t in 0..len {
                            d_v_bands[b][c][t] += a[r][t] * doc;
                        }
                    }
                }
            }
        }

        // Analysis adjoint: synthesize band gradients back to time domain.
        let d_q = self.synthesize(&d_q_bands)?;
        let d_k = self.synthesize(&d_k_bands)?;
        let d_v = self.synthesize(&d_v_bands)?;

        let mut d_window = vec![0.0; len];
        for c in 0..dk {
            for t in 0..len {
                grads.wq[c] += d_q[c][t] * window[t];
                grads.wk[c] += d_k[c][t] * window[t];
                grads.wv[c] += d_v[c][t] * window[t];
                d_window[t] +=
                    d_q[c][t] * self.wq[c] + d_k[c][t] * self.wk[c] + d_v[c][t] * self.wv[c];
            }
        }
        Ok((grads, d_window))
    }
}
