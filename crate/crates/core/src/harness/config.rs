use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::corpus::SourceFormat;
use crate::linear::DEFAULT_C_GRID;
use crate::pooling::Family;
use crate::recurrent::{Architecture, TrainSpec};

/// Environment variable naming the root of relative data paths.
pub const DATA_DIR_ENV: &str = "TDSA_DATA_DIR";

/// One experiment: a dataset, a method, word vectors and training knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub method: MethodConfig,
    pub embeddings: EmbeddingsConfig,
    #[serde(default)]
    pub lexicons: LexiconsConfig,
    #[serde(default)]
    pub training: TrainingConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub format: SourceFormat,
    pub train: Vec<String>,
    /// Test files. When empty, a stratified split of `train` is used.
    #[serde(default)]
    pub test: Vec<String>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
    /// CoNLL-U parses covering train and test sentences, for the TDParse family.
    #[serde(default)]
    pub parses: Option<String>,
    /// Force token boundaries at annotated span edges.
    #[serde(default = "yes")]
    pub split_at_spans: bool,
}

fn default_test_fraction() -> f64 {
    0.3
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodKind {
    Pooling(Family),
    Recurrent(Architecture),
}

impl MethodKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::Pooling(f) => f.as_str(),
            MethodKind::Recurrent(a) => a.as_str(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconName {
    #[default]
    Mpqa,
    Hl,
    Nrc,
}

impl LexiconName {
    pub fn display(self) -> &'static str {
        match self {
            LexiconName::Mpqa => "MPQA",
            LexiconName::Hl => "HL",
            LexiconName::Nrc => "NRC",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub name: MethodKind,
    /// Lexicons united for the `+` pooling methods.
    #[serde(default)]
    pub lexicon: Vec<LexiconName>,
    /// Edge limit of the dependency context; absent means the whole component.
    #[serde(default)]
    pub dep_depth: Option<usize>,
    /// Put the target tokens on both sides of TDLSTM/TCLSTM.
    #[serde(default = "yes")]
    pub target_both_sides: bool,
}

impl MethodConfig {
    /// Human-readable method label, e.g. `target-dep+: HL & MPQA`.
    pub fn label(&self) -> String {
        let mut lexicons = self.lexicon.clone();
        lexicons.sort();
        lexicons.dedup();
        match self.name {
            MethodKind::Pooling(f) if f.needs_lexicon() && !lexicons.is_empty() => {
                let names: Vec<&str> = lexicons.iter().map(|l| l.display()).collect();
                format!("{}: {}", f.as_str(), names.join(" & "))
            }
            other => other.as_str().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSource {
    pub path: String,
    /// Expected width; checked after loading when given.
    #[serde(default)]
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingsConfig {
    /// Candidate word-vector sets. Each candidate names one or more sources
    /// whose vectors are concatenated; with several candidates the best is
    /// chosen on training data only.
    pub candidates: Vec<Vec<String>>,
    /// Drop vectors of words that never occur in the train or test text.
    #[serde(default = "yes")]
    pub filter_vocab: bool,
    #[serde(flatten)]
    pub sources: BTreeMap<String, EmbeddingSource>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconsConfig {
    pub mpqa_path: Option<String>,
    pub hl_pos_path: Option<String>,
    pub hl_neg_path: Option<String>,
    pub nrc_path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    /// Max-min scale pooled features (fitted on training rows only).
    pub scale: bool,
    pub c_grid: Vec<f64>,
    /// Fixed C; skips cross-validation when set.
    pub c: Option<f64>,
    pub folds: usize,
    pub cv_seed: u64,
    pub svm_tolerance: f64,
    pub svm_max_iterations: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    pub validation_seed: u64,
    pub hidden_dim: Option<usize>,
    pub pad_length: Option<usize>,
    /// Seeds of a multi-seed study.
    pub seeds: Vec<u64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let lstm = TrainSpec::default();
        TrainingConfig {
            scale: true,
            c_grid: DEFAULT_C_GRID.to_vec(),
            c: None,
            folds: 5,
            cv_seed: 0,
            svm_tolerance: 1e-4,
            svm_max_iterations: 10_000,
            learning_rate: lstm.learning_rate,
            max_epochs: lstm.max_epochs,
            patience: lstm.patience,
            seed: lstm.seed,
            validation_fraction: lstm.validation_fraction,
            validation_seed: lstm.validation_seed,
            hidden_dim: None,
            pad_length: None,
            seeds: Vec::new(),
        }
    }
}

impl TrainingConfig {
    pub fn train_spec(&self) -> TrainSpec {
        TrainSpec {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed: self.seed,
            validation_fraction: self.validation_fraction,
            validation_seed: self.validation_seed,
            pad_length: self.pad_length,
            hidden_dim: self.hidden_dim,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.dataset.train.is_empty() {
            return bad("dataset.train lists no files".into());
        }
        if self.embeddings.candidates.is_empty() || self.embeddings.candidates.iter().any(Vec::is_empty) {
            return bad("embeddings.candidates must hold at least one non-empty list".into());
        }
        for name in self.embeddings.candidates.iter().flatten() {
            if !self.embeddings.sources.contains_key(name) {
                return bad(format!("embeddings.{name} is not defined"));
            }
        }
        if let MethodKind::Pooling(f) = self.method.name {
            if f.needs_lexicon() && self.method.lexicon.is_empty() {
                return bad(format!("method.lexicon is required for {f}"));
            }
            if f.needs_graph() && self.dataset.parses.is_none() {
                return bad(format!("dataset.parses is required for {f}"));
            }
        }
        if self.training.folds < 2 {
            return bad(format!("training.folds must be at least 2, got {}", self.training.folds));
        }
        Ok(())
    }

    /// Config with a different seed, as used by seed studies.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.training.seed = seed;
        c
    }
}

/// Resolve a configured path: absolute paths are kept, relative ones are
/// joined to `root`.
pub fn resolve_path(root: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

/// The data root from `TDSA_DATA_DIR`, falling back to `fallback`.
pub fn data_root(fallback: &Path) -> PathBuf {
    std::env::var_os(DATA_DIR_ENV).map_or_else(|| fallback.to_path_buf(), PathBuf::from)
}
