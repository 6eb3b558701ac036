use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::MethodKind;
use super::record::ExperimentRecord;
use super::HarnessError;
use crate::corpus::DatasetStats;
use crate::pooling::Family;
use crate::recurrent::Architecture;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportShape {
    Table2,
    Table3,
    Table4,
    Table5,
    Table6,
    FigDist,
}

impl FromStr for ReportShape {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "table2" => Ok(ReportShape::Table2),
            "table3" => Ok(ReportShape::Table3),
            "table4" => Ok(ReportShape::Table4),
            "table5" => Ok(ReportShape::Table5),
            "table6" => Ok(ReportShape::Table6),
            "fig_dist" => Ok(ReportShape::FigDist),
            other => Err(HarnessError::Config(format!("unknown report shape {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Text(String),
}

/// A rendered table: a header row, labelled rows of cells (`None` for a
/// missing value) and the number of decimals per numeric column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub shape: ReportShape,
    pub title: String,
    pub headers: Vec<String>,
    pub decimals: Vec<usize>,
    pub rows: Vec<Vec<Option<Cell>>>,
}

impl Report {
    fn new(shape: ReportShape, title: &str, headers: &[&str], decimals: &[usize]) -> Self {
        Report {
            shape,
            title: title.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            decimals: decimals.to_vec(),
            rows: Vec::new(),
        }
    }

    fn render_cell(&self, column: usize, cell: &Option<Cell>) -> String {
        match cell {
            None => "-".to_string(),
            Some(Cell::Text(t)) => t.clone(),
            Some(Cell::Number(v)) => format!("{v:.*}", self.decimals.get(column).copied().unwrap_or(2)),
        }
    }

    /// Fixed-width text table.
    pub fn text(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| row.iter().enumerate().map(|(c, cell)| self.render_cell(c, cell)).collect())
            .collect();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &rendered {
            for (c, s) in row.iter().enumerate() {
                widths[c] = widths[c].max(s.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        writeln!(out, "{}", line(&self.headers)).unwrap();
        let rule: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        writeln!(out, "{}", "-".repeat(rule)).unwrap();
        for row in &rendered {
            writeln!(out, "{}", line(row)).unwrap();
        }
        out
    }

    /// Comma-separated values with a header line.
    pub fn csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    None => String::new(),
                    Some(Cell::Text(t)) if t.contains(',') => format!("\"{t}\""),
                    Some(Cell::Text(t)) => t.clone(),
                    Some(Cell::Number(v)) => v.to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn num(v: f64) -> Option<Cell> {
    Some(Cell::Number(v))
}

fn text(s: impl Into<String>) -> Option<Cell> {
    Some(Cell::Text(s.into()))
}

/// Dataset overview, one row per dataset in the given order.
pub fn table2(stats: &[DatasetStats]) -> Report {
    let mut r = Report::new(
        ReportShape::Table2,
        "Dataset statistics",
        &["Dataset", "Size", "ATS", "Uniq", "AVG Len", "S1", "S2", "S3"],
        &[0, 0, 2, 0, 2, 2, 2, 2],
    );
    for s in stats {
        r.rows.push(vec![
            text(&s.name),
            num(s.size as f64),
            num(s.ats),
            num(s.uniq as f64),
            num(s.avg_len),
            num(s.s1),
            num(s.s2),
            num(s.s3),
        ]);
    }
    r
}

/// Positive/negative word counts of one lexicon (or union of lexicons).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconCounts {
    pub name: String,
    pub positive: usize,
    pub positive_lowered: usize,
    pub negative: usize,
    pub negative_lowered: usize,
}

pub fn table3(rows: &[LexiconCounts]) -> Report {
    let mut r = Report::new(
        ReportShape::Table3,
        "Sentiment lexicon statistics",
        &["Lexicons", "Positive", "Positive Lowered", "Negative", "Negative Lowered"],
        &[0, 0, 0, 0, 0],
    );
    for c in rows {
        r.rows.push(vec![
            text(&c.name),
            num(c.positive as f64),
            num(c.positive_lowered as f64),
            num(c.negative as f64),
            num(c.negative_lowered as f64),
        ]);
    }
    r
}

/// Methods of the mass-evaluation grid, in column order.
pub const TABLE6_METHODS: [MethodKind; 7] = [
    MethodKind::Pooling(Family::TargetDep),
    MethodKind::Pooling(Family::TargetDepPlus),
    MethodKind::Pooling(Family::TdParse),
    MethodKind::Pooling(Family::TdParsePlus),
    MethodKind::Recurrent(Architecture::Lstm),
    MethodKind::Recurrent(Architecture::TdLstm),
    MethodKind::Recurrent(Architecture::TcLstm),
];

/// Records sorted so that later entries win when several share a key:
/// ascending by timestamp, then content hash.
fn chronological(records: &[ExperimentRecord]) -> Vec<&ExperimentRecord> {
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.environment.timestamp, &a.content_hash).cmp(&(b.environment.timestamp, &b.content_hash))
    });
    sorted
}

fn percent(v: f64) -> f64 {
    100.0 * v
}

/// Build a record-based report. Dataset and lexicon tables are built from
/// statistics with [`table2`] and [`table3`] instead.
pub fn report(records: &[ExperimentRecord], shape: ReportShape) -> Result<Report, HarnessError> {
    match shape {
        ReportShape::Table2 | ReportShape::Table3 => Err(HarnessError::Config(format!(
            "{shape:?} is built from dataset or lexicon statistics, not experiment records"
        ))),
        ReportShape::Table4 => Ok(table4(records)),
        ReportShape::Table5 => Ok(table5(records)),
        ReportShape::Table6 => Ok(table6(records)),
        ReportShape::FigDist => Ok(fig_dist(records)),
    }
}

/// Test accuracy and macro-F1 (%) of every pooling run, latest per
/// (dataset, method label).
fn table4(records: &[ExperimentRecord]) -> Report {
    let mut r = Report::new(
        ReportShape::Table4,
        "Neural pooling results",
        &["Method", "Dataset", "Accuracy", "Macro F1"],
        &[0, 0, 2, 2],
    );
    let mut latest: BTreeMap<(String, String), &ExperimentRecord> = BTreeMap::new();
    for rec in chronological(records) {
        if matches!(rec.config.method.name, MethodKind::Pooling(_)) {
            latest.insert((rec.config.dataset.name.clone(), rec.config.method.label()), rec);
        }
    }
    for ((dataset, label), rec) in latest {
        r.rows.push(vec![
            text(label),
            text(dataset),
            num(percent(rec.metrics.accuracy)),
            num(percent(rec.metrics.macro_f1)),
        ]);
    }
    r
}

/// Seed-study summaries (macro-F1 %), one row per (method, dataset, embedding).
fn table5(records: &[ExperimentRecord]) -> Report {
    let mut r = Report::new(
        ReportShape::Table5,
        "LSTM results over seeds (macro F1)",
        &["Method", "Dataset", "Embedding", "Seeds", "R (Max)", "R (Mean)", "R (Min)", "Std"],
        &[0, 0, 0, 0, 2, 2, 2, 2],
    );
    let mut latest: BTreeMap<(usize, String, String), &ExperimentRecord> = BTreeMap::new();
    for rec in chronological(records) {
        if let (MethodKind::Recurrent(arch), Some(_)) = (rec.config.method.name, &rec.details.seed_study) {
            let order = Architecture::ALL.iter().position(|a| *a == arch).unwrap_or(0);
            latest.insert(
                (order, rec.config.dataset.name.clone(), rec.details.embedding.join("+")),
                rec,
            );
        }
    }
    for ((_, dataset, embedding), rec) in latest {
        let study = rec.details.seed_study.as_ref().expect("filtered above");
        let s = study.summary;
        r.rows.push(vec![
            text(rec.config.method.name.as_str().to_uppercase()),
            text(dataset),
            text(embedding),
            num(study.seeds.len() as f64),
            num(percent(s.max)),
            num(percent(s.mean)),
            num(percent(s.min)),
            num(percent(s.std)),
        ]);
    }
    r
}

/// Macro-F1 (%) grid: datasets by the seven compared methods, plus a mean
/// row over the datasets present in each column when there are several rows.
fn table6(records: &[ExperimentRecord]) -> Report {
    let mut headers = vec!["Dataset".to_string()];
    headers.extend(TABLE6_METHODS.iter().map(|m| format!("{} F1", m.as_str())));
    let mut r = Report {
        shape: ReportShape::Table6,
        title: "Mass evaluation (macro F1)".into(),
        decimals: vec![2; headers.len()],
        headers,
        rows: Vec::new(),
    };
    let mut grid: BTreeMap<String, [Option<f64>; 7]> = BTreeMap::new();
    for rec in chronological(records) {
        if let Some(col) = TABLE6_METHODS.iter().position(|m| *m == rec.config.method.name) {
            grid.entry(rec.config.dataset.name.clone()).or_default()[col] = Some(percent(rec.metrics.macro_f1));
        }
    }
    for (dataset, cells) in &grid {
        let mut row = vec![text(dataset)];
        row.extend(cells.iter().map(|c| c.map(Cell::Number)));
        r.rows.push(row);
    }
    if grid.len() > 1 {
        let mut row = vec![text("Mean")];
        for col in 0..TABLE6_METHODS.len() {
            let values: Vec<f64> = grid.values().filter_map(|cells| cells[col]).collect();
            row.push(if values.is_empty() {
                None
            } else {
                num(values.iter().sum::<f64>() / values.len() as f64)
            });
        }
        r.rows.push(row);
    }
    r
}

/// Per-seed macro-F1 values of every seed study, one row per run, for
/// external distribution plots.
fn fig_dist(records: &[ExperimentRecord]) -> Report {
    let mut r = Report::new(
        ReportShape::FigDist,
        "Seed distribution (macro F1)",
        &["Method", "Dataset", "Embedding", "Seed", "Macro F1"],
        &[0, 0, 0, 0, 4],
    );
    let mut rows = Vec::new();
    for rec in records {
        if let Some(study) = &rec.details.seed_study {
            for run in &study.runs {
                rows.push((
                    rec.config.method.name.as_str().to_string(),
                    rec.config.dataset.name.clone(),
                    rec.details.embedding.join("+"),
                    run.seed,
                    run.macro_f1,
                ));
            }
        }
    }
    rows.sort_by(|a, b| (&a.0, &a.1, &a.2, a.3).cmp(&(&b.0, &b.1, &b.2, b.3)));
    for (method, dataset, embedding, seed, f1) in rows {
        r.rows.push(vec![text(method), text(dataset), text(embedding), num(seed as f64), num(f1)]);
    }
    r
}
