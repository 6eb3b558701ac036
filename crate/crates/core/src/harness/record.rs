use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::metrics::Metrics;
use super::HarnessError;
use crate::linear::CvSelection;
use crate::recurrent::{History, SeedStudy};

/// Version string stored in every record.
pub const VERSION: &str = concat!("tdsa ", env!("CARGO_PKG_VERSION"));

/// Outcome of choosing among several word-vector candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub embedding: Vec<String>,
    /// Cross-validation accuracy (pooling) or best validation accuracy (LSTMs).
    pub score: f64,
}

/// Everything a run learned besides the test metrics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDetails {
    pub embedding: Vec<String>,
    pub embedding_dim: usize,
    pub candidates: Vec<CandidateScore>,
    pub train_size: usize,
    pub test_size: usize,
    pub c_value: Option<f64>,
    pub cv: Option<CvSelection>,
    pub history: Option<History>,
    pub pad_length: Option<usize>,
    pub seed_study: Option<SeedStudy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Environment {
    pub fn now() -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Environment {
            version: VERSION.to_string(),
            timestamp,
        }
    }
}

/// Immutable result of one experiment. `content_hash` is the SHA-256 of the
/// record's JSON with the hash field empty; it is checked on every read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub metrics: Metrics,
    pub details: RunDetails,
    pub environment: Environment,
    pub artifacts: Vec<String>,
    pub content_hash: String,
}

impl ExperimentRecord {
    pub fn new(
        config: ExperimentConfig,
        metrics: Metrics,
        details: RunDetails,
        environment: Environment,
    ) -> Result<Self, HarnessError> {
        let mut record = ExperimentRecord {
            config,
            metrics,
            details,
            environment,
            artifacts: Vec::new(),
            content_hash: String::new(),
        };
        record.content_hash = record.compute_hash()?;
        Ok(record)
    }

    pub fn compute_hash(&self) -> Result<String, HarnessError> {
        let mut unhashed = self.clone();
        unhashed.content_hash.clear();
        let bytes = serde_json::to_vec(&unhashed)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn verify(&self) -> Result<(), HarnessError> {
        let found = self.compute_hash()?;
        if found != self.content_hash {
            return Err(HarnessError::Integrity {
                expected: self.content_hash.clone(),
                found,
            });
        }
        Ok(())
    }

    /// File name used by the results store.
    pub fn file_name(&self) -> String {
        let name = self.config.method.name.as_str();
        let method = if let Some(stem) = name.strip_suffix('+') {
            format!("{stem}plus")
        } else if let Some(stem) = name.strip_suffix('-') {
            format!("{stem}minus")
        } else {
            name.to_string()
        };
        let dataset: String = self
            .config
            .dataset
            .name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        format!("{dataset}-{method}-{}.json", &self.content_hash[..16])
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let record: ExperimentRecord = serde_json::from_str(text)?;
        record.verify()?;
        Ok(record)
    }
}

/// A directory of content-addressed record files.
#[derive(Clone, Debug)]
pub struct ResultsStore {
    dir: PathBuf,
}

impl ResultsStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, HarnessError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ResultsStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write `record` under its content-addressed name. An existing file of
    /// that name already holds identical content and is left untouched.
    pub fn write(&self, record: &ExperimentRecord) -> Result<PathBuf, HarnessError> {
        record.verify()?;
        let path = self.dir.join(record.file_name());
        let json = serde_json::to_string_pretty(record)?;
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                file.write_all(json.as_bytes())?;
                file.write_all(b"\n")?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {}
            Err(e) => return Err(e.into()),
        }
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<ExperimentRecord, HarnessError> {
        let text = fs::read_to_string(path)?;
        ExperimentRecord::from_json(&text).map_err(|e| match e {
            HarnessError::Integrity { expected, found } => HarnessError::Stage {
                stage: "read record",
                message: format!("{}: content hash {expected} does not match {found}", path.display()),
            },
            other => other,
        })
    }

    /// All records in the store, ordered by file name.
    pub fn read_all(&self) -> Result<Vec<ExperimentRecord>, HarnessError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths.iter().map(|p| ResultsStore::read(p)).collect()
    }
}
