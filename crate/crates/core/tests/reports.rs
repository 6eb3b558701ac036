use tdsa_core::harness::*;
use tdsa_core::recurrent::{Architecture, ModelSpec, SeedRun, SeedStudy, Summary};

const DATASETS: [&str; 6] = ["dong", "election", "mitchell", "semeval-l", "semeval-r", "youtubean"];

fn base_config(dataset: &str, method: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
[dataset]
name = "{dataset}"
format = "jsonl"
train = ["x.jsonl"]
parses = "x.conllu"
[method]
name = "{method}"
lexicon = ["hl", "mpqa", "nrc"]
[embeddings]
candidates = [["v"]]
[embeddings.v]
path = "v.txt"
"#
    ))
    .unwrap()
}

fn record(dataset: &str, method: &str, f1: f64, timestamp: u64) -> ExperimentRecord {
    let metrics = Metrics {
        accuracy: f1,
        macro_f1: f1,
        per_class: Vec::new(),
    };
    let env = Environment {
        version: VERSION.into(),
        timestamp,
    };
    ExperimentRecord::new(base_config(dataset, method), metrics, RunDetails::default(), env).unwrap()
}

/// Deterministic distinct cell value for (dataset d, method m).
fn cell(d: usize, m: usize) -> f64 {
    0.4 + 0.01 * d as f64 + 0.03 * m as f64
}

#[test]
fn mass_evaluation_grid() {
    let mut records = Vec::new();
    for (d, dataset) in DATASETS.iter().enumerate() {
        for (m, method) in TABLE6_METHODS.iter().enumerate() {
            records.push(record(dataset, method.as_str(), cell(d, m), 10));
        }
    }
    assert_eq!(records.len(), 42);
    let table = report(&records, ReportShape::Table6).unwrap();
    assert_eq!(table.headers.len(), 8);
    assert_eq!(table.rows.len(), 7);
    for (d, row) in table.rows[..6].iter().enumerate() {
        assert_eq!(row[0], Some(Cell::Text(DATASETS[d].into())));
        for m in 0..7 {
            assert_eq!(row[m + 1], Some(Cell::Number(100.0 * cell(d, m))));
        }
    }
    let mean_row = &table.rows[6];
    assert_eq!(mean_row[0], Some(Cell::Text("Mean".into())));
    for m in 0..7 {
        let expected: f64 = (0..6).map(|d| 100.0 * cell(d, m)).sum::<f64>() / 6.0;
        match &mean_row[m + 1] {
            Some(Cell::Number(v)) => assert!((v - expected).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
    // Text rendering uses two decimals throughout.
    let text = table.text();
    assert!(text.contains("40.00"), "{text}");

    let back: Report = serde_json::from_str(&table.to_json().unwrap()).unwrap();
    assert_eq!(back, table);
}

#[test]
fn single_record_gives_one_row_and_latest_wins() {
    let old = record("dong", "target-dep", 0.5, 1);
    let table = report(std::slice::from_ref(&old), ReportShape::Table6).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0][1], Some(Cell::Number(50.0)));
    assert_eq!(table.rows[0][2], None);

    let new = record("dong", "target-dep", 0.6, 2);
    let table = report(&[new, old], ReportShape::Table6).unwrap();
    assert_eq!(table.rows[0][1], Some(Cell::Number(60.0)));

    let t4 = report(&[record("dong", "target-dep+", 0.7, 1)], ReportShape::Table4).unwrap();
    assert_eq!(t4.rows.len(), 1);
    assert_eq!(t4.rows[0][0], Some(Cell::Text("target-dep+: MPQA & HL & NRC".into())));
}

#[test]
fn seed_distribution_exports() {
    let mut rec = record("dong", "tdlstm", 0.6, 1);
    let runs: Vec<SeedRun> = [(3, 0.6), (1, 0.7), (2, 0.5)]
        .iter()
        .map(|&(seed, f1)| SeedRun {
            seed,
            macro_f1: f1,
            accuracy: f1,
            best_epoch: 1,
            epochs_run: 2,
            predictions: Vec::new(),
        })
        .collect();
    let f1: Vec<f64> = runs.iter().map(|r| r.macro_f1).collect();
    rec.details.seed_study = Some(SeedStudy {
        model: ModelSpec {
            arch: Architecture::TdLstm,
            input_dim: 2,
            hidden_dim: 2,
        },
        seeds: vec![3, 1, 2],
        runs,
        summary: Summary::of(&f1).unwrap(),
        accuracy_summary: Summary::of(&f1).unwrap(),
    });
    let rec = ExperimentRecord::new(rec.config, rec.metrics, rec.details, rec.environment).unwrap();

    let dist = report(std::slice::from_ref(&rec), ReportShape::FigDist).unwrap();
    let seeds: Vec<_> = dist.rows.iter().map(|r| r[3].clone()).collect();
    assert_eq!(seeds, vec![Some(Cell::Number(1.0)), Some(Cell::Number(2.0)), Some(Cell::Number(3.0))]);
    assert!(dist.csv().starts_with("Method,Dataset,Embedding,Seed,Macro F1\n"));

    let t5 = report(&[rec], ReportShape::Table5).unwrap();
    assert_eq!(t5.rows.len(), 1);
    assert_eq!(t5.rows[0][4], Some(Cell::Number(70.0)));
    match &t5.rows[0][5] {
        Some(Cell::Number(v)) => assert!((v - 60.0).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
}
