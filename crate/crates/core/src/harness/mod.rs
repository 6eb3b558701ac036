//! Metrics, experiment orchestration, the results store and report tables.
//!
//! An experiment is described by a TOML [`ExperimentConfig`]; running it
//! yields an [`ExperimentRecord`] that is stored as content-addressed JSON.
//! Macro-F1 always averages over all three classes.

mod config;
pub mod metrics;
mod pipeline;
mod record;
mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    data_root, resolve_path, DatasetConfig, EmbeddingSource, EmbeddingsConfig, ExperimentConfig, LexiconName,
    LexiconsConfig, MethodConfig, MethodKind, TrainingConfig, DATA_DIR_ENV,
};
pub use metrics::{accuracy, confusion_matrix, macro_f1, per_class, ClassScores, MetricError, Metrics};
pub use pipeline::{
    corpus_vocabulary, load_datasets, load_embeddings, load_graphs, load_lexicon, occurrences, pooled_features,
    run_experiment, run_recurrent_experiment, run_seed_study,
};
pub use record::{CandidateScore, Environment, ExperimentRecord, ResultsStore, RunDetails, VERSION};
pub use report::{report, table2, table3, Cell, LexiconCounts, Report, ReportShape, TABLE6_METHODS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{key}: cannot read {}", path.display())]
    MissingResource { key: String, path: PathBuf },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("content hash {expected} does not match recomputed {found}")]
    Integrity { expected: String, found: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
