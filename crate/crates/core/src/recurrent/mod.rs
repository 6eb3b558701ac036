//! LSTM, TDLSTM and TCLSTM classifiers with exact backpropagation through
//! time, the SGD/early-stopping training protocol and multi-seed studies.
//!
//! All arithmetic is `f64`. Gates are stacked input, forget, output,
//! candidate; the two-sided models feed the concatenated final states of a
//! left and a right cell into one softmax layer.

mod cell;
mod data;
mod inputs;
mod model;
mod params;
mod study;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::harness::metrics::MetricError;
use crate::text::TextError;

pub use cell::{lstm_backward, lstm_forward, CellTrace};
pub use data::{BundleExamples, DenseExamples, Examples};
pub use inputs::{build_inputs, build_inputs_with, pad_length_for, side_tokens, InputSpec};
pub use model::{
    backward, cross_entropy, cross_entropy_grad, forward, loss, loss_and_gradients, predict, softmax, ModelInput,
    ModelTrace,
};
pub use params::{CellParams, LstmParams, CLASSES, INIT_RANGE};
pub use study::{seed_study, SeedRun, SeedStudy, Summary};
pub use train::{
    predict_all, predict_indices, train, train_on_split, validation_split, EarlyStopping, EpochRecord, History,
    ModelSpec, TrainSpec, Verdict, DEFAULT_VALIDATION_SEED,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Lstm,
    TdLstm,
    TcLstm,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Lstm, Architecture::TdLstm, Architecture::TcLstm];

    /// Number of recurrent cells (input sequences) the model runs.
    pub fn sides(self) -> usize {
        match self {
            Architecture::Lstm => 1,
            Architecture::TdLstm | Architecture::TcLstm => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Lstm => "lstm",
            Architecture::TdLstm => "tdlstm",
            Architecture::TcLstm => "tclstm",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = RecurrentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lstm" => Ok(Architecture::Lstm),
            "tdlstm" => Ok(Architecture::TdLstm),
            "tclstm" => Ok(Architecture::TcLstm),
            other => Err(RecurrentError::Config(format!("unknown architecture {other:?}"))),
        }
    }
}

#[derive(Debug, Error)]
pub enum RecurrentError {
    #[error("step {step}: expected width {expected}, found {found}")]
    Dimension { step: usize, expected: usize, found: usize },
    #[error("model has {expected} input sides, got {found}")]
    Sides { expected: usize, found: usize },
    #[error("target has no tokens")]
    EmptyTarget,
    #[error("parameters became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("validation split: {0}")]
    Split(#[from] CorpusError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
