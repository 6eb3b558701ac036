use super::{CorpusError, Dataset, Label, ParseOutcome, ParseReport, Span, TargetInstance};

/// Parse a SemEval-2014 ABSA XML file.
///
/// ```xml
/// <sentences>
///   <sentence id="813">
///     <text>All the appetizers and salads were fabulous.</text>
///     <aspectTerms>
///       <aspectTerm term="appetizers" polarity="positive" from="8" to="18"/>
///     </aspectTerms>
///   </sentence>
/// </sentences>
/// ```
///
/// Each non-conflict aspect term becomes one instance with id
/// `<sentence id>#<term index>`.
pub fn parse_semeval(name: &str, xml: &[u8]) -> Result<ParseOutcome, CorpusError> {
    let source = std::str::from_utf8(xml).map_err(|e| CorpusError::Xml {
        line: 1,
        column: 1,
        message: e.to_string(),
    })?;
    let doc = roxmltree::Document::parse(source).map_err(|e| {
        let pos = e.pos();
        CorpusError::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;

    let mut report = ParseReport::default();
    let mut instances = Vec::new();
    for (sentence_index, sentence) in doc
        .descendants()
        .filter(|n| n.has_tag_name("sentence"))
        .enumerate()
    {
        let sentence_id = sentence
            .attribute("id")
            .map(str::to_string)
            .unwrap_or_else(|| sentence_index.to_string());
        let text = sentence
            .children()
            .find(|n| n.has_tag_name("text"))
            .and_then(|n| n.text())
            .unwrap_or("");
        let terms = sentence
            .descendants()
            .filter(|n| n.has_tag_name("aspectTerm"));
        for (term_index, term) in terms.enumerate() {
            let record = format!("{sentence_id}#{term_index}");
            let polarity = term.attribute("polarity").unwrap_or("");
            if polarity.eq_ignore_ascii_case("conflict") {
                report.conflict_dropped += 1;
                continue;
            }
            let label = match polarity.parse::<Label>() {
                Ok(label) => label,
                Err(e) => {
                    report.reject(record, e);
                    continue;
                }
            };
            let offsets = term
                .attribute("from")
                .zip(term.attribute("to"))
                .and_then(|(from, to)| Some((from.trim().parse().ok()?, to.trim().parse().ok()?)));
            let Some((from, to)) = offsets else {
                report.missing_span += 1;
                report.reject(record, "aspect term lacks numeric from/to offsets");
                continue;
            };
            let target = term.attribute("term").unwrap_or("");
            match TargetInstance::new(record.clone(), text, target, vec![Span::new(from, to)], label) {
                Ok(instance) => instances.push(instance),
                Err(e) => report.reject(record, e),
            }
        }
    }
    Ok(ParseOutcome {
        dataset: Dataset::new(name, instances)?,
        report,
    })
}
