//! Datasets, metrics, cost accounting, plot-data exports and challenge-set
//! subsampling.

mod dataset;
mod metrics;
mod plots;
mod results;
mod subsample;

use std::path::Path;

pub use dataset::{apply_index, load_dataset, load_index, write_index, Instance};
pub use metrics::{cost, exact_match, is_correct, label_match, roc_auc, CostModel};
pub use plots::{
    ablate_threshold, consistency_density, write_ablation_csv, write_density_csv, AblationRow, DensityBin,
    DENSITY_BIN_WIDTH,
};
pub use results::{
    aggregate, metric_name, read_jsonl, score_trace, score_traces, write_jsonl, Aggregates, ConfidenceSource,
    EvalResult,
};
pub use subsample::balanced_subsample;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("row {row}: {reason}")]
    Schema { row: usize, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("index id {0:?} is not in the dataset")]
    UnknownIndexId(String),
    #[error("need {needed} {class} rows, only {available} available")]
    InsufficientPool {
        class: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("subsample target must be even, got {0}")]
    InvalidTarget(usize),
    #[error("AUC needs both correct and incorrect predictions")]
    DegenerateLabels,
    #[error("confidence {0} is not a number")]
    InvalidConfidence(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("csv: {0}")]
    Csv(String),
    #[error("{0}")]
    Config(String),
}

impl EvalError {
    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        EvalError::Io {
            path: path.display().to_string(),
            reason: err.to_string(),
        }
    }
}
