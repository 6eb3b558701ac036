//! Sentiment lexicons (MPQA subjectivity clues, Hu & Liu opinion words, NRC
//! emotion lexicon), their union, word-count audit and context masking.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::ZERO_TOKEN;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("union of zero lexicons")]
    EmptyUnion,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// Word to polarity-set map. A word may carry both polarities.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SentimentLexicon {
    name: String,
    entries: BTreeMap<String, BTreeSet<Polarity>>,
    lowered: BTreeMap<String, BTreeSet<Polarity>>,
    skipped_lines: usize,
}

/// Which lexicon words survive masking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskPolicy {
    /// Keep a word listed under any polarity.
    #[default]
    Any,
    Positive,
    Negative,
}

impl SentimentLexicon {
    pub fn new(name: impl Into<String>) -> Self {
        SentimentLexicon {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn insert(&mut self, word: &str, polarity: Polarity) {
        self.entries.entry(word.to_string()).or_default().insert(polarity);
        self.lowered.entry(word.to_lowercase()).or_default().insert(polarity);
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lines that could not be interpreted while loading.
    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    pub fn entries(&self) -> &BTreeMap<String, BTreeSet<Polarity>> {
        &self.entries
    }

    /// Polarities of a word, looked up through the lowercase view.
    pub fn polarities(&self, word: &str) -> Option<&BTreeSet<Polarity>> {
        self.lowered.get(word).or_else(|| self.lowered.get(&word.to_lowercase()))
    }

    pub fn contains(&self, word: &str, policy: MaskPolicy) -> bool {
        match (self.polarities(word), policy) {
            (None, _) => false,
            (Some(_), MaskPolicy::Any) => true,
            (Some(p), MaskPolicy::Positive) => p.contains(&Polarity::Positive),
            (Some(p), MaskPolicy::Negative) => p.contains(&Polarity::Negative),
        }
    }

    /// `(positive, negative)` word counts; `lowered` counts distinct
    /// lowercased words instead of words as written.
    pub fn counts(&self, lowered: bool) -> (usize, usize) {
        let map = if lowered { &self.lowered } else { &self.entries };
        let count = |p: Polarity| map.values().filter(|set| set.contains(&p)).count();
        (count(Polarity::Positive), count(Polarity::Negative))
    }
}

/// Parse the MPQA subjectivity clue file
/// (`type=strongsubj len=1 word1=abandon pos1=verb stemmed1=y priorpolarity=negative`).
/// Only `positive`/`negative` prior polarities become entries.
pub fn parse_mpqa(bytes: &[u8]) -> SentimentLexicon {
    let mut lexicon = SentimentLexicon::new("mpqa");
    for line in decode_lines(bytes) {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut word = None;
        let mut polarity = None;
        for field in line.split_whitespace() {
            if let Some((key, value)) = field.split_once('=') {
                match key {
                    "word1" => word = Some(value),
                    "priorpolarity" => polarity = Some(value),
                    _ => {}
                }
            }
        }
        match (word, polarity) {
            (Some(w), Some("positive")) if !w.is_empty() => lexicon.insert(w, Polarity::Positive),
            (Some(w), Some("negative")) if !w.is_empty() => lexicon.insert(w, Polarity::Negative),
            (Some(w), Some(_)) if !w.is_empty() => {}
            _ => {
                log::debug!("mpqa: skipping malformed line {line:?}");
                lexicon.skipped_lines += 1;
            }
        }
    }
    lexicon
}

/// Parse the two Hu & Liu opinion word lists. Lines starting with `;` are
/// comments.
pub fn parse_hl(positive: &[u8], negative: &[u8]) -> SentimentLexicon {
    let mut lexicon = SentimentLexicon::new("hl");
    for (bytes, polarity) in [(positive, Polarity::Positive), (negative, Polarity::Negative)] {
        for line in decode_lines(bytes) {
            let word = line.trim();
            if word.is_empty() || word.starts_with(';') {
                continue;
            }
            lexicon.insert(word, polarity);
        }
    }
    lexicon
}

/// Parse the NRC word-emotion association lexicon (`word\temotion\tflag`).
pub fn parse_nrc(bytes: &[u8]) -> SentimentLexicon {
    let mut lexicon = SentimentLexicon::new("nrc");
    for line in decode_lines(bytes) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split('\t').collect();
        let [word, emotion, flag] = fields[..] else {
            lexicon.skipped_lines += 1;
            continue;
        };
        if flag.trim() != "1" {
            continue;
        }
        match emotion.trim() {
            "positive" => lexicon.insert(word.trim(), Polarity::Positive),
            "negative" => lexicon.insert(word.trim(), Polarity::Negative),
            _ => {}
        }
    }
    lexicon
}

/// Per-word union of polarity sets.
pub fn union(lexicons: &[&SentimentLexicon]) -> Result<SentimentLexicon, LexiconError> {
    if lexicons.is_empty() {
        return Err(LexiconError::EmptyUnion);
    }
    let name = lexicons.iter().map(|l| l.name()).collect::<Vec<_>>().join("+");
    let mut out = SentimentLexicon::new(name);
    for lexicon in lexicons {
        for (word, polarities) in &lexicon.entries {
            for &p in polarities {
                out.insert(word, p);
            }
        }
    }
    Ok(out)
}

/// Replace every token not in `lexicon` (under `policy`) by [`ZERO_TOKEN`].
pub fn mask_context<S: AsRef<str>>(tokens: &[S], lexicon: &SentimentLexicon, policy: MaskPolicy) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            let t = t.as_ref();
            if lexicon.contains(t, policy) {
                t.to_string()
            } else {
                ZERO_TOKEN.to_string()
            }
        })
        .collect()
}

/// Lines of a word list; invalid UTF-8 lines are read as Latin-1.
fn decode_lines(bytes: &[u8]) -> Vec<String> {
    bytes
        .split(|&b| b == b'\n')
        .map(|line| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            match std::str::from_utf8(line) {
                Ok(s) => s.to_string(),
                Err(_) => line.iter().map(|&b| b as char).collect(),
            }
        })
        .collect()
}

/// Distinct words of several lexicons; used for coverage audits.
pub fn vocabulary(lexicons: &[&SentimentLexicon]) -> HashSet<String> {
    lexicons
        .iter()
        .flat_map(|l| l.lowered.keys().cloned())
        .collect()
}
