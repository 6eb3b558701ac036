use super::{CorpusError, Dataset, Label, ParseOutcome, ParseReport, Span, TargetInstance};

const PLACEHOLDER: &str = "$T$";

/// Parse the three-line-per-record Twitter format:
///
/// ```text
/// i love $T$ so much
/// nlp
/// 1
/// ```
///
/// The sentence carries exactly one `$T$` placeholder which is replaced by
/// the target line; labels are `-1`, `0` or `1`. Trailing blank lines are
/// ignored; a partial final record is a format error.
pub fn parse_dong(name: &str, bytes: &[u8]) -> Result<ParseOutcome, CorpusError> {
    let source = String::from_utf8_lossy(bytes);
    let mut lines: Vec<&str> = source.lines().map(|l| l.trim_end_matches('\r')).collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if !lines.len().is_multiple_of(3) {
        return Err(CorpusError::Format {
            line: lines.len(),
            message: format!("{} lines do not form complete 3-line records", lines.len()),
        });
    }

    let mut report = ParseReport::default();
    let mut instances = Vec::with_capacity(lines.len() / 3);
    for (index, record) in lines.chunks(3).enumerate() {
        let id = format!("dong-{index}");
        let (sentence, target, label) = (record[0], record[1].trim(), record[2].trim());
        let label = match label {
            "-1" => Label::Negative,
            "0" => Label::Neutral,
            "1" => Label::Positive,
            other => {
                report.reject(id, format!("label {other:?} not in {{-1,0,1}}"));
                continue;
            }
        };
        let occurrences = sentence.matches(PLACEHOLDER).count();
        if occurrences != 1 {
            report.reject(id, format!("expected one {PLACEHOLDER} placeholder, found {occurrences}"));
            continue;
        }
        let byte_pos = sentence.find(PLACEHOLDER).expect("counted above");
        let start = sentence[..byte_pos].chars().count();
        let end = start + target.chars().count();
        let text = sentence.replacen(PLACEHOLDER, target, 1);
        match TargetInstance::new(id.clone(), text, target, vec![Span::new(start, end)], label) {
            Ok(instance) => instances.push(instance),
            Err(e) => report.reject(id, e),
        }
    }
    Ok(ParseOutcome {
        dataset: Dataset::new(name, instances)?,
        report,
    })
}
