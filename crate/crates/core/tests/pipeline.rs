use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use tdsa_core::harness::*;

const TARGETS: [&str; 5] = ["phone", "camera", "screen", "battery", "price"];
const OPINIONS: [(&str, &str); 3] = [("awful", "negative"), ("fine", "neutral"), ("great", "positive")];

/// Sixty sentences `the <target> is <opinion> today`, labelled by the
/// opinion word, with vectors, a lexicon and a chain-shaped parse each.
fn write_fixture(dir: &Path) {
    let mut jsonl = String::new();
    let mut conll = String::new();
    for i in 0..60 {
        let target = TARGETS[i % TARGETS.len()];
        let (opinion, label) = OPINIONS[i % 3];
        let filler = ["today", "again", "now", "honestly"][i % 4];
        let text = format!("the {target} is {opinion} {filler}");
        writeln!(
            jsonl,
            r#"{{"id":"s{i}","text":"{text}","target":"{target}","spans":[[4,{}]],"label":"{label}"}}"#,
            4 + target.len()
        )
        .unwrap();
        writeln!(conll, "# sent_id = s{i}").unwrap();
        for (k, (word, head)) in [("the", 2), (target, 3), ("is", 0), (opinion, 3), (filler, 3)].iter().enumerate() {
            writeln!(conll, "{}\t{word}\t_\t_\t_\t_\t{head}\tdep\t_\t_", k + 1).unwrap();
        }
        conll.push('\n');
    }
    fs::write(dir.join("data.jsonl"), jsonl).unwrap();
    fs::write(dir.join("parses.conllu"), conll).unwrap();
    let vectors = "\
the 0.1 0.1 0.0
is 0.0 0.2 0.1
awful -1.0 0.3 0.2
fine 0.0 1.0 -0.2
great 1.0 0.1 0.4
phone 0.2 -0.1 0.3
camera 0.3 0.0 -0.1
screen -0.2 0.2 0.1
battery 0.1 -0.3 0.2
price -0.1 0.1 -0.3
today 0.05 0.0 0.1
again 0.0 -0.05 0.1
now 0.02 0.03 -0.1
unused 9.0 9.0 9.0
";
    fs::write(dir.join("vectors.txt"), vectors).unwrap();
    fs::write(dir.join("vectors_b.txt"), "great 0.5\nawful -0.5\nfine 0.0\n").unwrap();
    fs::write(dir.join("pos.txt"), ";; positive\ngreat\n").unwrap();
    fs::write(dir.join("neg.txt"), ";; negative\nawful\n").unwrap();
}

fn config(method: &str) -> ExperimentConfig {
    let text = format!(
        r#"
[dataset]
name = "toy"
format = "jsonl"
train = ["data.jsonl"]
test_fraction = 0.3
split_seed = 5
parses = "parses.conllu"

[method]
name = "{method}"
lexicon = ["hl"]

[embeddings]
candidates = [["a"]]

[embeddings.a]
path = "vectors.txt"
dim = 3

[embeddings.b]
path = "vectors_b.txt"

[lexicons]
hl_pos_path = "pos.txt"
hl_neg_path = "neg.txt"

[training]
c_grid = [0.1, 1.0, 10.0]
folds = 3
max_epochs = 40
patience = 8
"#
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

#[test]
fn pooling_methods_learn_the_toy_task() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    for method in ["target-ind", "target-dep", "target-dep+", "tdparse-", "tdparse", "tdparse+"] {
        let record = run_experiment(&config(method), dir.path()).unwrap();
        assert_eq!(record.details.test_size, 18, "{method}");
        assert_eq!(record.metrics.accuracy, 1.0, "{method}: {:?}", record.metrics);
        assert!(record.details.c_value.is_some());
        record.verify().unwrap();
    }
}

#[test]
fn identical_configs_give_identical_metrics_and_store_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let c = config("target-dep");
    let a = run_experiment(&c, dir.path()).unwrap();
    let b = run_experiment(&c, dir.path()).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.details, b.details);

    let store = ResultsStore::open(dir.path().join("results")).unwrap();
    let path = store.write(&a).unwrap();
    assert_eq!(ResultsStore::read(&path).unwrap(), a);
}

#[test]
fn scaling_flag_is_the_only_config_difference() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let scaled = config("target-dep");
    let mut raw = scaled.clone();
    raw.training.scale = false;
    let a = run_experiment(&scaled, dir.path()).unwrap();
    let b = run_experiment(&raw, dir.path()).unwrap();
    let mut b_config = b.config.clone();
    b_config.training.scale = true;
    assert_eq!(a.config, b_config);
    assert_ne!(a.config, b.config);
}

#[test]
fn embedding_candidates_are_scored() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let mut c = config("target-dep");
    c.embeddings.candidates = vec![vec!["b".into()], vec!["a".into()], vec!["a".into(), "b".into()]];
    let record = run_experiment(&c, dir.path()).unwrap();
    assert_eq!(record.details.candidates.len(), 3);
    let best = record.details.candidates.iter().map(|s| s.score).fold(0.0, f64::max);
    let chosen = record.details.candidates.iter().find(|s| s.embedding == record.details.embedding).unwrap();
    assert_eq!(chosen.score, best);
}

#[test]
fn recurrent_run_and_seed_study() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let c = config("tdlstm");
    let record = run_experiment(&c, dir.path()).unwrap();
    // Longest side: "<target> is <opinion> <filler>" read backwards.
    assert_eq!(record.details.pad_length, Some(4));
    assert!(record.details.history.is_some());

    let study = run_seed_study(&c, dir.path(), &[1, 2, 3]).unwrap();
    let s = study.details.seed_study.as_ref().unwrap();
    assert_eq!(s.runs.len(), 3);
    assert_eq!(study.metrics.macro_f1, s.runs[0].macro_f1);
    let json = serde_json::to_string(&study).unwrap();
    let back = ExperimentRecord::from_json(&json).unwrap().details.seed_study.unwrap();
    assert_eq!(back.summary, s.summary);
    let f1 = |st: &tdsa_core::recurrent::SeedStudy| st.runs.iter().map(|r| r.macro_f1).collect::<Vec<_>>();
    assert_eq!(f1(&back), f1(s));
}

#[test]
fn missing_resource_names_its_key() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    fs::remove_file(dir.path().join("neg.txt")).unwrap();
    let err = run_experiment(&config("target-dep+"), dir.path()).unwrap_err();
    match err {
        HarnessError::MissingResource { key, .. } => assert_eq!(key, "lexicons.hl_neg_path"),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn stage_errors_carry_the_stage_name() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    fs::write(dir.path().join("data.jsonl"), "{not json}\n").unwrap();
    let err = run_experiment(&config("target-dep"), dir.path()).unwrap_err();
    assert!(matches!(err, HarnessError::Stage { stage: "parse", .. }), "{err}");
}
