use std::io::{BufRead, BufReader, Read, Write};

use super::{CorpusError, Dataset, TargetInstance};

/// Write one JSON object per instance: `id`, `text`, `target`, `spans`, `label`.
pub fn write_jsonl<W: Write>(dataset: &Dataset, mut sink: W) -> Result<(), CorpusError> {
    for instance in dataset.instances() {
        serde_json::to_writer(&mut sink, instance).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

/// Read a canonical JSONL file. Blank lines are ignored; record indices in
/// errors count non-blank lines from zero.
pub fn read_jsonl<R: Read>(name: &str, source: R) -> Result<Dataset, CorpusError> {
    let mut instances = Vec::new();
    let mut index = 0;
    for line in BufReader::new(source).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let instance: TargetInstance = serde_json::from_str(&line).map_err(|e| CorpusError::Record {
            index,
            message: e.to_string(),
        })?;
        instances.push(instance);
        index += 1;
    }
    Dataset::new(name, instances)
}
