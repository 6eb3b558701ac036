use super::{CorpusError, Dataset, Label, ParseOutcome, ParseReport, Span, TargetInstance};

/// Parse a token-per-line entity/sentiment file.
///
/// Each line is `token <TAB> tag <TAB> sentiment`, where `tag` is `O`,
/// `B-<type>` or `I-<type>` and `sentiment` is `_` or a polarity name.
/// Blank lines end a sentence; lines starting with `#` are comments. A
/// `B`/`I` run is one target; every polarity value inside the run must agree.
/// Sentence text is the tokens joined with single spaces.
pub fn parse_mitchell(name: &str, bytes: &[u8]) -> Result<ParseOutcome, CorpusError> {
    let source = String::from_utf8_lossy(bytes);
    let mut report = ParseReport::default();
    let mut instances = Vec::new();
    let mut sentence: Vec<Row> = Vec::new();
    let mut sentence_index = 0;

    for (line_no, line) in source.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !sentence.is_empty() {
                convert_sentence(sentence_index, &sentence, &mut instances, &mut report);
                sentence_index += 1;
                sentence.clear();
            }
            continue;
        }
        let mut fields = line.split('\t');
        let token = fields.next().unwrap_or("").trim();
        let tag = fields.next().map(str::trim).unwrap_or("O");
        let sentiment = fields.next().map(str::trim).unwrap_or("_");
        if token.is_empty() || token.contains(char::is_whitespace) {
            return Err(CorpusError::Format {
                line: line_no + 1,
                message: format!("bad token field in {line:?}"),
            });
        }
        let tag = match tag.chars().next() {
            Some('O') | Some('o') => Tag::Outside,
            Some('B') | Some('b') => Tag::Begin,
            Some('I') | Some('i') => Tag::Inside,
            _ => {
                return Err(CorpusError::Format {
                    line: line_no + 1,
                    message: format!("unknown tag {tag:?}"),
                })
            }
        };
        sentence.push(Row {
            token: token.to_string(),
            tag,
            sentiment: sentiment.to_string(),
        });
    }
    if !sentence.is_empty() {
        convert_sentence(sentence_index, &sentence, &mut instances, &mut report);
    }
    Ok(ParseOutcome {
        dataset: Dataset::new(name, instances)?,
        report,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tag {
    Outside,
    Begin,
    Inside,
}

struct Row {
    token: String,
    tag: Tag,
    sentiment: String,
}

fn convert_sentence(
    sentence_index: usize,
    rows: &[Row],
    instances: &mut Vec<TargetInstance>,
    report: &mut ParseReport,
) {
    let text = rows.iter().map(|r| r.token.as_str()).collect::<Vec<_>>().join(" ");
    let mut starts = Vec::with_capacity(rows.len());
    let mut offset = 0;
    for row in rows {
        starts.push(offset);
        offset += row.token.chars().count() + 1;
    }

    // Collect maximal B I* runs; a stray I starts a run of its own.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match row.tag {
            Tag::Outside => {}
            Tag::Begin => runs.push((i, i + 1)),
            Tag::Inside => match runs.last_mut() {
                Some(run) if run.1 == i => run.1 = i + 1,
                _ => runs.push((i, i + 1)),
            },
        }
    }

    for (run_index, &(first, last)) in runs.iter().enumerate() {
        let id = format!("mitchell-{sentence_index}-{run_index}");
        let mut label: Option<Label> = None;
        let mut conflict = false;
        for row in &rows[first..last] {
            if row.sentiment == "_" || row.sentiment.is_empty() {
                continue;
            }
            match row.sentiment.parse::<Label>() {
                Ok(l) if label.is_none_or(|prev| prev == l) => label = Some(l),
                Ok(_) => conflict = true,
                Err(e) => {
                    report.reject(id.clone(), e);
                    conflict = true;
                    break;
                }
            }
        }
        if conflict {
            if !report.rejected.iter().any(|r| r.record == id) {
                report.reject(id, "conflicting sentiments inside one target run");
            }
            continue;
        }
        let Some(label) = label else {
            report.reject(id, "target run carries no sentiment");
            continue;
        };
        let target = rows[first..last]
            .iter()
            .map(|r| r.token.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let start = starts[first];
        let span = Span::new(start, start + target.chars().count());
        match TargetInstance::new(id.clone(), text.clone(), target, vec![span], label) {
            Ok(instance) => instances.push(instance),
            Err(e) => report.reject(id, e),
        }
    }
}
