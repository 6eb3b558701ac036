//! Dataset ingestion.
//!
//! Every supported source format is parsed into a [`Dataset`] of
//! [`TargetInstance`]s. Parsers never abort on a bad record: the record is
//! rejected, logged, and counted in the [`ParseReport`] so corpus sizes can be
//! audited against the published statistics.

mod dong;
mod election;
mod instance;
mod jsonl;
mod mitchell;
mod semeval;
mod split;
mod stats;
mod youtubean;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dong::parse_dong;
pub use election::parse_election;
pub use instance::{char_slice, Dataset, Label, Span, TargetInstance};
pub use jsonl::{read_jsonl, write_jsonl};
pub use mitchell::parse_mitchell;
pub use semeval::parse_semeval;
pub use split::{make_split, stratified_partition, SplitSpec};
pub use stats::{dataset_stats, normalize_sentence, DatasetStats};
pub use youtubean::parse_youtubean;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown sentiment label {0:?}")]
    Label(String),
    #[error("instance {id}: {reason}")]
    Span { id: String, reason: String },
    #[error("duplicate instance id {0:?}")]
    DuplicateId(String),
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("malformed input at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("record {index}: {message}")]
    Record { index: usize, message: String },
    #[error("class {0} has fewer than 2 instances; cannot stratify")]
    ClassTooSmall(Label),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("dataset is empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Recording medium of the source texts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    #[default]
    Written,
    Spoken,
}

/// Why a source record did not become an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub record: String,
    pub reason: String,
}

/// Book-keeping produced alongside every parsed dataset.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub medium: Medium,
    pub rejected: Vec<Rejection>,
    /// SemEval aspect terms labelled `conflict`.
    pub conflict_dropped: usize,
    /// Annotations that carry no character offsets and cannot be placed.
    pub missing_span: usize,
    /// Instances whose target was located at more than one position by search.
    pub multi_occurrence: Vec<String>,
}

impl ParseReport {
    pub(crate) fn reject(&mut self, record: impl Into<String>, reason: impl fmt::Display) {
        let record = record.into();
        let reason = reason.to_string();
        log::warn!("rejected record {record}: {reason}");
        self.rejected.push(Rejection { record, reason });
    }
}

#[derive(Clone, Debug)]
pub struct ParseOutcome {
    pub dataset: Dataset,
    pub report: ParseReport,
}

/// Supported on-disk source formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Semeval,
    Dong,
    Mitchell,
    Election,
    Youtubean,
    Jsonl,
}

impl std::str::FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "semeval" => Ok(SourceFormat::Semeval),
            "dong" => Ok(SourceFormat::Dong),
            "mitchell" => Ok(SourceFormat::Mitchell),
            "election" => Ok(SourceFormat::Election),
            "youtubean" => Ok(SourceFormat::Youtubean),
            "jsonl" => Ok(SourceFormat::Jsonl),
            other => Err(format!("unknown dataset format {other:?}")),
        }
    }
}

/// Parse one or more files of the same format into a single dataset.
///
/// When several files are given, instance ids are prefixed with the file's
/// position (`0:`, `1:` ...) so train and test files with overlapping
/// native ids can be combined.
pub fn parse_files(
    format: SourceFormat,
    name: &str,
    files: &[Vec<u8>],
) -> Result<ParseOutcome, CorpusError> {
    if format == SourceFormat::Election {
        return parse_election(name, files);
    }
    let mut instances = Vec::new();
    let mut report = ParseReport::default();
    for (i, bytes) in files.iter().enumerate() {
        let outcome = match format {
            SourceFormat::Semeval => parse_semeval(name, bytes)?,
            SourceFormat::Dong => parse_dong(name, bytes)?,
            SourceFormat::Mitchell => parse_mitchell(name, bytes)?,
            SourceFormat::Youtubean => parse_youtubean(name, bytes)?,
            SourceFormat::Jsonl => ParseOutcome {
                dataset: read_jsonl(name, bytes.as_slice())?,
                report: ParseReport::default(),
            },
            SourceFormat::Election => unreachable!(),
        };
        report.medium = outcome.report.medium;
        report.conflict_dropped += outcome.report.conflict_dropped;
        report.missing_span += outcome.report.missing_span;
        report.rejected.extend(outcome.report.rejected);
        report.multi_occurrence.extend(outcome.report.multi_occurrence);
        for instance in outcome.dataset.instances() {
            let instance = if files.len() > 1 {
                TargetInstance::new(
                    format!("{i}:{}", instance.id()),
                    instance.text(),
                    instance.target(),
                    instance.spans().to_vec(),
                    instance.label(),
                )?
            } else {
                instance.clone()
            };
            instances.push(instance);
        }
    }
    Ok(ParseOutcome {
        dataset: Dataset::new(name, instances)?,
        report,
    })
}
