use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, Label};
use crate::text::tokenize;

/// Corpus statistics in the shape of the dataset overview table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub name: String,
    /// Number of target instances.
    pub size: usize,
    /// Mean targets per distinct sentence.
    pub ats: f64,
    /// Distinct lowercased target strings.
    pub uniq: usize,
    /// Mean token count of the sentence, averaged over instances.
    pub avg_len: f64,
    /// Percentage of sentences with exactly 1, 2, 3 distinct labels.
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub sentences: usize,
}

/// Collapse internal whitespace runs and trim; used as sentence identity.
pub fn normalize_sentence(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn dataset_stats(dataset: &Dataset) -> Result<DatasetStats, CorpusError> {
    if dataset.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut sentence_labels: HashMap<String, BTreeSet<Label>> = HashMap::new();
    let mut sentence_lengths: HashMap<String, usize> = HashMap::new();
    let mut targets = HashSet::new();
    let mut token_total = 0usize;
    for instance in dataset.instances() {
        let key = normalize_sentence(instance.text());
        let len = *sentence_lengths
            .entry(key.clone())
            .or_insert_with(|| tokenize(instance.text()).len());
        token_total += len;
        sentence_labels.entry(key).or_default().insert(instance.label());
        targets.insert(instance.target().to_lowercase());
    }
    let sentences = sentence_labels.len();
    let mut by_distinct = [0usize; 3];
    for labels in sentence_labels.values() {
        by_distinct[labels.len() - 1] += 1;
    }
    let pct = |count: usize| 100.0 * count as f64 / sentences as f64;
    let size = dataset.len();
    Ok(DatasetStats {
        name: dataset.name().to_string(),
        size,
        ats: size as f64 / sentences as f64,
        uniq: targets.len(),
        avg_len: token_total as f64 / size as f64,
        s1: pct(by_distinct[0]),
        s2: pct(by_distinct[1]),
        s3: pct(by_distinct[2]),
        sentences,
    })
}
