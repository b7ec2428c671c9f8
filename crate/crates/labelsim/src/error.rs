//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: unknown label value {value:?} (expected one of {expected:?})")]
    UnknownLabel {
        row: usize,
        value: String,
        expected: Vec<String>,
    },

    #[error("row {row}, column {column:?}: non-numeric feature value {value:?}")]
    NonNumericFeature {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{what} must be in {range}, got {value}")]
    OutOfRange {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("class {class} has {available} samples, need {needed}")]
    ClassTooSmall {
        class: &'static str,
        available: usize,
        needed: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("batch size {requested} exceeds pool size {available}")]
    BatchExceedsPool { requested: usize, available: usize },

    #[error("labeling budget {budget} exceeds pool size {pool}")]
    BudgetExceedsPool { budget: usize, pool: usize },

    #[error("feature dimension mismatch: model expects {expected}, sample has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("confusion matrix is empty")]
    EmptyConfusion,

    #[error("prediction/truth length mismatch: {predictions} vs {truth}")]
    LengthMismatch { predictions: usize, truth: usize },

    #[error("need at least {needed} values, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("curve must have >= 2 points with strictly increasing budgets")]
    MalformedCurve,

    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
