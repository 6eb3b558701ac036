use serde::Deserialize;
use serde_json::Value;

use super::{CorpusError, Dataset, Label, ParseOutcome, ParseReport, Span, TargetInstance};

#[derive(Deserialize)]
struct Tweet {
    #[serde(alias = "id")]
    tweet_id: Value,
    #[serde(alias = "text")]
    content: String,
    #[serde(default)]
    entities: Vec<Entity>,
}

#[derive(Deserialize)]
struct Entity {
    #[serde(alias = "target")]
    entity: String,
    sentiment: String,
    #[serde(default)]
    offset: Option<usize>,
    #[serde(default)]
    offset_end: Option<usize>,
}

/// Parse a set of election-tweet annotation files.
///
/// Each file holds tweets either as one JSON value (object or array) or as
/// JSON Lines. A tweet is `{"tweet_id", "content", "entities": [...]}` and
/// each entity is `{"entity", "sentiment", "offset"?, "offset_end"?}`, with
/// character offsets into `content`. Entities without an `offset` cannot be
/// placed (the same word may occur twice) and are skipped, counted in
/// [`ParseReport::missing_span`].
pub fn parse_election(name: &str, files: &[Vec<u8>]) -> Result<ParseOutcome, CorpusError> {
    let mut report = ParseReport::default();
    let mut instances = Vec::new();
    let mut record_index = 0;
    for bytes in files {
        for tweet in read_tweets(bytes)? {
            let tweet = match tweet {
                Ok(t) => t,
                Err(e) => {
                    report.reject(format!("record {record_index}"), e);
                    record_index += 1;
                    continue;
                }
            };
            record_index += 1;
            let tweet_id = match &tweet.tweet_id {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            for (entity_index, entity) in tweet.entities.iter().enumerate() {
                let id = format!("{tweet_id}-{entity_index}");
                let Some(start) = entity.offset else {
                    report.missing_span += 1;
                    continue;
                };
                let label = match entity.sentiment.parse::<Label>() {
                    Ok(l) => l,
                    Err(e) => {
                        report.reject(id, e);
                        continue;
                    }
                };
                let end = entity
                    .offset_end
                    .unwrap_or(start + entity.entity.chars().count());
                match TargetInstance::new(
                    id.clone(),
                    tweet.content.clone(),
                    entity.entity.clone(),
                    vec![Span::new(start, end)],
                    label,
                ) {
                    Ok(instance) => instances.push(instance),
                    Err(e) => report.reject(id, e),
                }
            }
        }
    }
    Ok(ParseOutcome {
        dataset: Dataset::new(name, instances)?,
        report,
    })
}

fn read_tweets(bytes: &[u8]) -> Result<Vec<Result<Tweet, serde_json::Error>>, CorpusError> {
    let text = String::from_utf8_lossy(bytes);
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if let Ok(value) = serde_json::from_str::<Value>(trimmed) {
        return Ok(match value {
            Value::Array(items) => items.into_iter().map(serde_json::from_value).collect(),
            other => vec![serde_json::from_value(other)],
        });
    }
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(line) {
            Ok(value) => out.push(serde_json::from_value(value)),
            Err(e) => {
                return Err(CorpusError::Format {
                    line: line_no + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}
