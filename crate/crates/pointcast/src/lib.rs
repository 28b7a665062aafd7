//! Momentum-based point-by-point sports prediction.
//!
//! The pipeline turns raw match point records into per-player momentum
//! series, denoises them while preserving abrupt regime shifts, and forecasts
//! the next point with a dual-head model whose outputs drive a winner
//! decision:
//!
//! 1. [`data`] — ingest and validate point records, build per-player
//!    multivariate series, generate synthetic matches with planted shifts.
//! 2. [`modwt`] — the non-decimated wavelet transform underlying both the
//!    change-point encoder and the seasonal attention head.
//! 3. [`llsa`] — locate jump regions in wavelet coefficients and reconstruct
//!    each series with jumps kept and off-jump detail suppressed.
//! 4. [`momentum`] — AHP importance weights, time-decayed indicator
//!    weighting, and the opponent pressure matrix.
//! 5. [`decompose`] — adaptive multi-kernel trend/seasonal split.
//! 6. [`forecast`] — RevIN + MLP trend head, wavelet-attention seasonal
//!    head, SGD training with hand-rolled reverse-mode gradients.
//! 7. [`outcome`] — winner decision with ranking tiebreak and whole-match
//!    simulation.
//! 8. [`eval`] — metrics, ELO and logistic-regression baselines, and the
//!    repeated split benchmark.

pub mod data;
pub mod decompose;
pub mod error;
pub mod eval;
pub mod forecast;
pub mod llsa;
pub mod modwt;
pub mod momentum;
pub mod outcome;
pub mod pipeline;

pub use error::{Error, Result};
