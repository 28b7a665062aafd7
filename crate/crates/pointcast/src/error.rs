//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required column is absent from an input file header.
    #[error("missing column `{0}`")]
    MissingColumn(String),

    /// A cell could not be parsed as the expected type.
    #[error("row {row}: cannot parse `{value}` in column `{column}`: {reason}")]
    Parse {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A domain-type invariant was violated (non-finite value, non-monotone
    /// time axis, decreasing counter, ...).
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("level {level} out of range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    /// No coefficient exceeded the detection threshold: the series is
    /// jump-free at the inspected scale.
    #[error("no jump found: peak coefficient below detection threshold")]
    NoJumpFound,

    /// AHP pairwise judgments are too inconsistent to trust.
    #[error("AHP matrix inconsistent: consistency ratio {cr:.4} exceeds 0.1")]
    AhpInconsistent { cr: f64 },

    #[error("unknown player `{0}`")]
    UnknownPlayer(String),

    /// Momentum forecasts tied and rankings could not break the tie.
    #[error("unresolved tie between `{0}` and `{1}`")]
    UnresolvedTie(String, String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("model file version {found} unsupported (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
