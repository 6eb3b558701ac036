use serde::Deserialize;
use serde_json::Value;

use super::{CorpusError, Dataset, Label, Medium, ParseOutcome, ParseReport, Span, TargetInstance};

#[derive(Deserialize)]
struct Record {
    #[serde(default)]
    id: Option<Value>,
    #[serde(alias = "text")]
    sentence: String,
    #[serde(alias = "term", alias = "target")]
    aspect: String,
    polarity: String,
    #[serde(default)]
    from: Option<usize>,
    #[serde(default)]
    to: Option<usize>,
}

/// Parse spoken-review aspect records.
///
/// Input is a JSON array (or JSON Lines) of
/// `{"id"?, "sentence", "aspect", "polarity", "from"?, "to"?}`. When offsets
/// are absent every case-insensitive whole-word occurrence of the aspect is
/// recorded as a span (falling back to raw substring matches), and the id is
/// listed in [`ParseReport::multi_occurrence`] if there is more than one.
pub fn parse_youtubean(name: &str, bytes: &[u8]) -> Result<ParseOutcome, CorpusError> {
    let text = String::from_utf8_lossy(bytes);
    let values: Vec<Value> = match serde_json::from_str::<Value>(text.trim()) {
        Ok(Value::Array(items)) => items,
        Ok(Value::Null) => Vec::new(),
        Ok(other) => vec![other],
        Err(_) if text.trim().is_empty() => Vec::new(),
        Err(_) => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                serde_json::from_str(l).map_err(|e| CorpusError::Format {
                    line: n + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?,
    };

    let mut report = ParseReport {
        medium: Medium::Spoken,
        ..ParseReport::default()
    };
    let mut instances = Vec::with_capacity(values.len());
    for (index, value) in values.into_iter().enumerate() {
        let record: Record = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                report.reject(format!("yt-{index}"), e);
                continue;
            }
        };
        let id = match &record.id {
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
            None => format!("yt-{index}"),
        };
        if record.polarity.eq_ignore_ascii_case("conflict") {
            report.conflict_dropped += 1;
            continue;
        }
        let label = match record.polarity.parse::<Label>() {
            Ok(l) => l,
            Err(e) => {
                report.reject(id, e);
                continue;
            }
        };
        let spans = match (record.from, record.to) {
            (Some(from), Some(to)) => vec![Span::new(from, to)],
            _ => {
                let spans = find_occurrences(&record.sentence, &record.aspect);
                if spans.is_empty() {
                    report.reject(id, format!("aspect {:?} not found in sentence", record.aspect));
                    continue;
                }
                if spans.len() > 1 {
                    report.multi_occurrence.push(id.clone());
                }
                spans
            }
        };
        match TargetInstance::new(id.clone(), record.sentence, record.aspect, spans, label) {
            Ok(instance) => instances.push(instance),
            Err(e) => report.reject(id, e),
        }
    }
    Ok(ParseOutcome {
        dataset: Dataset::new(name, instances)?,
        report,
    })
}

/// Non-overlapping case-insensitive occurrences of `needle` in `haystack`, in
/// character offsets. Whole-word matches are preferred when any exist.
pub(crate) fn find_occurrences(haystack: &str, needle: &str) -> Vec<Span> {
    let hay: Vec<char> = haystack.chars().collect();
    let pat: Vec<char> = needle.chars().collect();
    if pat.is_empty() || pat.len() > hay.len() {
        return Vec::new();
    }
    let eq = |a: char, b: char| a == b || a.to_lowercase().eq(b.to_lowercase());
    let mut all = Vec::new();
    let mut i = 0;
    while i + pat.len() <= hay.len() {
        if hay[i..i + pat.len()].iter().zip(&pat).all(|(&a, &b)| eq(a, b)) {
            all.push(Span::new(i, i + pat.len()));
            i += pat.len();
        } else {
            i += 1;
        }
    }
    let is_word = |c: char| c.is_alphanumeric();
    let whole: Vec<Span> = all
        .iter()
        .copied()
        .filter(|s| {
            let before = s.start.checked_sub(1).map(|j| hay[j]);
            let after = hay.get(s.end).copied();
            !before.is_some_and(is_word) && !after.is_some_and(is_word)
        })
        .collect();
    if whole.is_empty() {
        all
    } else {
        whole
    }
}
