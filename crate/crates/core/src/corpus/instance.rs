use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Three-way sentiment label. The derived order (NEG < NEU < POS) is the
/// canonical class order used for tie-breaking and report columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Neutral,
    Positive,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Negative, Label::Neutral, Label::Positive];

    pub fn index(self) -> usize {
        match self {
            Label::Negative => 0,
            Label::Neutral => 1,
            Label::Positive => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Label::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Negative => "negative",
            Label::Neutral => "neutral",
            Label::Positive => "positive",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "negative" | "neg" | "-1" => Ok(Label::Negative),
            "neutral" | "neu" | "0" => Ok(Label::Neutral),
            "positive" | "pos" | "1" | "+1" => Ok(Label::Positive),
            other => Err(CorpusError::Label(other.to_string())),
        }
    }
}

/// Character span `[start, end)` measured in Unicode scalar values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, end): (usize, usize)) -> Self {
        Span { start, end }
    }
}

impl From<Span> for (usize, usize) {
    fn from(span: Span) -> Self {
        (span.start, span.end)
    }
}

/// Slice `text` by character offsets. Returns `None` when out of bounds.
pub fn char_slice(text: &str, span: Span) -> Option<&str> {
    if span.start > span.end {
        return None;
    }
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let start = indices.nth(span.start)?;
    let end = if span.end == span.start {
        start
    } else {
        indices.nth(span.end - span.start - 1)?
    };
    Some(&text[start..end])
}

/// One text with one annotated target and its sentiment.
///
/// The span invariants are checked by [`TargetInstance::new`], the only way
/// to build one, so every value in circulation is valid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetInstance {
    id: String,
    text: String,
    target: String,
    spans: Vec<Span>,
    label: Label,
}

#[derive(Deserialize)]
struct RawInstance {
    id: String,
    text: String,
    target: String,
    spans: Vec<Span>,
    label: Label,
}

impl<'de> Deserialize<'de> for TargetInstance {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawInstance::deserialize(deserializer)?;
        TargetInstance::new(raw.id, raw.text, raw.target, raw.spans, raw.label)
            .map_err(serde::de::Error::custom)
    }
}

impl TargetInstance {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        target: impl Into<String>,
        spans: Vec<Span>,
        label: Label,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let text = text.into();
        let target = target.into();
        if spans.is_empty() {
            return Err(CorpusError::Span {
                id,
                reason: "no spans".into(),
            });
        }
        let wanted = target.to_lowercase();
        for (i, span) in spans.iter().enumerate() {
            if span.is_empty() {
                return Err(CorpusError::Span {
                    id,
                    reason: format!("empty span {:?}", (span.start, span.end)),
                });
            }
            if i > 0 && spans[i - 1].end > span.start {
                return Err(CorpusError::Span {
                    id,
                    reason: "spans overlap or are not sorted".into(),
                });
            }
            match char_slice(&text, *span) {
                Some(slice) if slice.to_lowercase() == wanted => {}
                Some(slice) => {
                    return Err(CorpusError::Span {
                        id,
                        reason: format!("span text {slice:?} does not match target {target:?}"),
                    })
                }
                None => {
                    return Err(CorpusError::Span {
                        id,
                        reason: format!("span {:?} out of bounds", (span.start, span.end)),
                    })
                }
            }
        }
        Ok(TargetInstance {
            id,
            text,
            target,
            spans,
            label,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn label(&self) -> Label {
        self.label
    }
}

/// An ordered collection of instances with unique ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    name: String,
    instances: Vec<TargetInstance>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, instances: Vec<TargetInstance>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(instances.len());
        for instance in &instances {
            if !seen.insert(instance.id()) {
                return Err(CorpusError::DuplicateId(instance.id().to_string()));
            }
        }
        Ok(Dataset {
            name: name.into(),
            instances,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            instances: Vec::new(),
        }
    }

    /// Concatenate datasets in order; ids must stay unique.
    pub fn concat(name: impl Into<String>, parts: impl IntoIterator<Item = Dataset>) -> Result<Self, CorpusError> {
        let instances = parts.into_iter().flat_map(|d| d.instances).collect();
        Dataset::new(name, instances)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instances(&self) -> &[TargetInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(TargetInstance::label).collect()
    }

    /// Sub-dataset made of the given positions, in the given order.
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> Dataset {
        Dataset {
            name: name.into(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }
}
