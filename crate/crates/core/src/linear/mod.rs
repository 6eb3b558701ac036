//! Max-min feature scaling and a linear SVM with cross-validated C.
//!
//! The classifier is an L2-regularized squared-hinge SVM trained one class
//! against the rest by dual coordinate descent (the LIBLINEAR default
//! solver), so results are comparable with `LinearSVC`-style pipelines.

mod cv;
mod scaler;
mod svm;

use thiserror::Error;

use crate::corpus::Label;

pub use cv::{cv_select_c, evaluate_fold, stratified_folds, CScore, CvSelection, Fold, FoldOutcome, DEFAULT_C_GRID};
pub use scaler::{fit_scaler, MaxMinScaler};
pub use svm::{train_svm, train_svm_traced, LinearModel, SvmConfig, SvmTrace};

pub(crate) use svm::argmax_label;

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("no training rows")]
    Empty,
    #[error("row {row}: expected {expected} features, found {found}")]
    Dimension { row: usize, expected: usize, found: usize },
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("row {row} contains a non-finite value")]
    NonFinite { row: usize },
    #[error("training data holds a single class")]
    SingleClass,
    #[error("class {class} has {count} instances, fewer than {folds} folds")]
    ClassSmallerThanFolds { class: Label, count: usize, folds: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}
