use std::collections::{HashMap, HashSet};
use std::fmt::Display;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{resolve_path, ExperimentConfig, LexiconName, LexiconsConfig, MethodKind};
use super::metrics::Metrics;
use super::record::{CandidateScore, Environment, ExperimentRecord, RunDetails};
use super::HarnessError;
use crate::corpus::{make_split, parse_files, Dataset, Label, SplitSpec, TargetInstance};
use crate::embedding::{load_text_embeddings, EmbeddingMatrix};
use crate::lexicon::{parse_hl, parse_mpqa, parse_nrc, union, SentimentLexicon};
use crate::linear::{cv_select_c, train_svm, MaxMinScaler, SvmConfig};
use crate::pooling::{assemble_values, parse_conll, DepGraph, Family, MethodSpec};
use crate::recurrent::{
    LstmParams,
    predict_all, seed_study, train_on_split, validation_split, Architecture, BundleExamples, History, InputSpec,
    ModelSpec, SeedStudy,
};
use crate::text::{extract_contexts, extract_contexts_split, ContextBundle};

/// Attach a stage name to any error.
trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, HarnessError>;
}

impl<T, E: Display> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, HarnessError> {
        self.map_err(|e| HarnessError::Stage {
            stage,
            message: e.to_string(),
        })
    }
}

fn read_resource(root: &Path, key: &str, path: &str) -> Result<Vec<u8>, HarnessError> {
    let full = resolve_path(root, path);
    std::fs::read(&full).map_err(|_| HarnessError::MissingResource {
        key: key.to_string(),
        path: full,
    })
}

fn read_all(root: &Path, key: &str, paths: &[String]) -> Result<Vec<Vec<u8>>, HarnessError> {
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| read_resource(root, &format!("{key}[{i}]"), p))
        .collect()
}

/// Parse the configured train/test data. Without test files the training
/// data is split with the configured fraction and seed.
pub fn load_datasets(config: &ExperimentConfig, root: &Path) -> Result<(Dataset, Dataset), HarnessError> {
    let d = &config.dataset;
    let train_files = read_all(root, "dataset.train", &d.train)?;
    let train = parse_files(d.format, &format!("{}-train", d.name), &train_files).stage("parse")?;
    if d.test.is_empty() {
        let spec = SplitSpec::new(d.test_fraction, d.split_seed);
        return make_split(&train.dataset, &spec).stage("split");
    }
    let test_files = read_all(root, "dataset.test", &d.test)?;
    let test = parse_files(d.format, &format!("{}-test", d.name), &test_files).stage("parse")?;
    Ok((train.dataset, test.dataset))
}

/// Load and unite the named lexicons.
pub fn load_lexicon(
    config: &LexiconsConfig,
    names: &[LexiconName],
    root: &Path,
) -> Result<SentimentLexicon, HarnessError> {
    let require = |key: &str, value: &Option<String>| -> Result<Vec<u8>, HarnessError> {
        let path = value.as_ref().ok_or_else(|| HarnessError::Config(format!("lexicons.{key} is not set")))?;
        read_resource(root, &format!("lexicons.{key}"), path)
    };
    let mut names = names.to_vec();
    names.sort();
    names.dedup();
    let mut parts = Vec::new();
    for name in names {
        parts.push(match name {
            LexiconName::Mpqa => parse_mpqa(&require("mpqa_path", &config.mpqa_path)?),
            LexiconName::Hl => parse_hl(
                &require("hl_pos_path", &config.hl_pos_path)?,
                &require("hl_neg_path", &config.hl_neg_path)?,
            ),
            LexiconName::Nrc => parse_nrc(&require("nrc_path", &config.nrc_path)?),
        });
    }
    let refs: Vec<&SentimentLexicon> = parts.iter().collect();
    union(&refs).stage("lexicon")
}

/// Context bundles of every occurrence of `instance`.
pub fn occurrences(instance: &TargetInstance, split_at_spans: bool) -> Result<Vec<ContextBundle>, HarnessError> {
    if split_at_spans {
        extract_contexts_split(instance).stage("tokenize")
    } else {
        extract_contexts(instance).stage("tokenize")
    }
}

/// Every token of the given datasets, as the pipeline tokenizes them.
pub fn corpus_vocabulary(datasets: &[&Dataset], split_at_spans: bool) -> Result<HashSet<String>, HarnessError> {
    let mut vocab = HashSet::new();
    for dataset in datasets {
        for instance in dataset.instances() {
            if let Some(bundle) = occurrences(instance, split_at_spans)?.first() {
                vocab.extend(bundle.full.iter().map(|t| t.surface.clone()));
            }
        }
    }
    Ok(vocab)
}

/// Load the named sources (optionally keeping only `vocab`) and concatenate
/// them in order.
pub fn load_embeddings(
    config: &ExperimentConfig,
    names: &[String],
    root: &Path,
    vocab: Option<&HashSet<String>>,
) -> Result<EmbeddingMatrix, HarnessError> {
    let mut combined: Option<EmbeddingMatrix> = None;
    for name in names {
        let source = config
            .embeddings
            .sources
            .get(name)
            .ok_or_else(|| HarnessError::Config(format!("embeddings.{name} is not defined")))?;
        let bytes = read_resource(root, &format!("embeddings.{name}.path"), &source.path)?;
        let loaded = load_text_embeddings(&bytes).stage("embeddings")?;
        if let Some(dim) = source.dim {
            if loaded.matrix.dim() != dim {
                return Err(HarnessError::Config(format!(
                    "embeddings.{name}: configured dim {dim}, file has {}",
                    loaded.matrix.dim()
                )));
            }
        }
        let matrix = match vocab {
            Some(v) => loaded.matrix.filter_vocab(v),
            None => loaded.matrix,
        };
        combined = Some(match combined {
            Some(prev) => prev.concat(&matrix),
            None => matrix,
        });
    }
    combined.ok_or_else(|| HarnessError::Config("empty embedding candidate".into()))
}

/// Key shared by a sentence's text and its parse: lowercase, no whitespace.
fn graph_key(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).flat_map(char::to_lowercase).collect()
}

/// Dependency parses indexed by sentence content.
pub fn load_graphs(root: &Path, path: &str) -> Result<HashMap<String, DepGraph>, HarnessError> {
    let bytes = read_resource(root, "dataset.parses", path)?;
    let mut map = HashMap::new();
    for graph in parse_conll(&bytes).stage("parses")? {
        map.entry(graph_key(&graph.tokens().concat())).or_insert(graph);
    }
    Ok(map)
}

/// Pooled feature rows for `dataset`, computed in parallel.
pub fn pooled_features(
    dataset: &Dataset,
    method: &MethodSpec,
    embedding: &EmbeddingMatrix,
    graphs: Option<&HashMap<String, DepGraph>>,
    split_at_spans: bool,
) -> Result<Vec<Vec<f64>>, HarnessError> {
    dataset
        .instances()
        .par_iter()
        .map(|instance| {
            let bundles = occurrences(instance, split_at_spans)?;
            let graph = match graphs {
                Some(g) => Some(g.get(&graph_key(instance.text())).ok_or_else(|| HarnessError::Stage {
                    stage: "features",
                    message: format!("instance {}: no dependency parse for its sentence", instance.id()),
                })?),
                None => None,
            };
            assemble_values(&bundles, method, embedding, graph).map_err(|e| HarnessError::Stage {
                stage: "features",
                message: format!("instance {}: {e}", instance.id()),
            })
        })
        .collect()
}

fn svm_base(config: &ExperimentConfig) -> SvmConfig {
    SvmConfig {
        c_value: config.training.c.unwrap_or(1.0),
        tolerance: config.training.svm_tolerance,
        max_iterations: config.training.svm_max_iterations,
        seed: config.training.cv_seed,
    }
}

/// Run the experiment described by `config`, with relative paths under `root`.
pub fn run_experiment(config: &ExperimentConfig, root: &Path) -> Result<ExperimentRecord, HarnessError> {
    config.validate()?;
    let (train, test) = load_datasets(config, root)?;
    let (metrics, details) = match config.method.name {
        MethodKind::Pooling(family) => run_pooling(config, family, &train, &test, root)?,
        MethodKind::Recurrent(arch) => {
            let (metrics, details, _) = run_recurrent(config, arch, &train, &test, root, None)?;
            (metrics, details)
        }
    };
    ExperimentRecord::new(config.clone(), metrics, details, Environment::now())
}

/// Like [`run_experiment`] for an LSTM method, also returning the trained
/// parameters of the chosen model.
pub fn run_recurrent_experiment(
    config: &ExperimentConfig,
    root: &Path,
) -> Result<(ExperimentRecord, LstmParams), HarnessError> {
    config.validate()?;
    let arch = match config.method.name {
        MethodKind::Recurrent(a) => a,
        MethodKind::Pooling(f) => {
            return Err(HarnessError::Config(format!("expected an LSTM method, got {f}")));
        }
    };
    let (train, test) = load_datasets(config, root)?;
    let (metrics, details, params) = run_recurrent(config, arch, &train, &test, root, None)?;
    let params = params.expect("selection runs keep their parameters");
    let record = ExperimentRecord::new(config.clone(), metrics, details, Environment::now())?;
    Ok((record, params))
}

/// Multi-seed LSTM study over `seeds` with a fixed validation split. The
/// record's metrics are those of the first seed.
pub fn run_seed_study(config: &ExperimentConfig, root: &Path, seeds: &[u64]) -> Result<ExperimentRecord, HarnessError> {
    config.validate()?;
    let arch = match config.method.name {
        MethodKind::Recurrent(a) => a,
        MethodKind::Pooling(f) => {
            return Err(HarnessError::Config(format!("seed studies need an LSTM method, got {f}")));
        }
    };
    if seeds.is_empty() {
        return Err(HarnessError::Config("no seeds given".into()));
    }
    let (train, test) = load_datasets(config, root)?;
    let (metrics, details, _) = run_recurrent(config, arch, &train, &test, root, Some(seeds))?;
    ExperimentRecord::new(config.clone(), metrics, details, Environment::now())
}

fn vocabulary_filter(
    config: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<Option<HashSet<String>>, HarnessError> {
    if config.embeddings.filter_vocab {
        corpus_vocabulary(&[train, test], config.dataset.split_at_spans).map(Some)
    } else {
        Ok(None)
    }
}

fn run_pooling(
    config: &ExperimentConfig,
    family: Family,
    train: &Dataset,
    test: &Dataset,
    root: &Path,
) -> Result<(Metrics, RunDetails), HarnessError> {
    let t = &config.training;
    let split = config.dataset.split_at_spans;
    let lexicon = if family.needs_lexicon() {
        Some(Arc::new(load_lexicon(&config.lexicons, &config.method.lexicon, root)?))
    } else {
        None
    };
    let mut method = MethodSpec::new(family, lexicon).stage("features")?;
    method.dep_depth = config.method.dep_depth;
    let graphs = match (&config.dataset.parses, family.needs_graph()) {
        (Some(path), true) => Some(load_graphs(root, path)?),
        _ => None,
    };
    let vocab = vocabulary_filter(config, train, test)?;
    let train_labels = train.labels();
    let base = svm_base(config);

    // Pick the word vectors by cross-validation on the training data.
    let mut candidates = Vec::new();
    let mut best: Option<(usize, f64, EmbeddingMatrix, Vec<Vec<f64>>)> = None;
    for (i, names) in config.embeddings.candidates.iter().enumerate() {
        let embedding = load_embeddings(config, names, root, vocab.as_ref())?;
        let features = pooled_features(train, &method, &embedding, graphs.as_ref(), split)?;
        let score = if config.embeddings.candidates.len() > 1 {
            let grid = t.c.map_or_else(|| t.c_grid.clone(), |c| vec![c]);
            let selection = cv_select_c(&features, &train_labels, &grid, t.folds, t.cv_seed, t.scale, &base)
                .stage("cross-validation")?;
            selection.scores.iter().map(|s| s.mean_accuracy).fold(f64::NEG_INFINITY, f64::max)
        } else {
            0.0
        };
        candidates.push(CandidateScore {
            embedding: names.clone(),
            score,
        });
        if best.as_ref().is_none_or(|b| score > b.1) {
            best = Some((i, score, embedding, features));
        }
    }
    let (chosen, _, embedding, mut train_x) = best.expect("at least one candidate");
    if config.embeddings.candidates.len() == 1 {
        candidates.clear();
    }

    let (c_value, cv) = match t.c {
        Some(c) => (c, None),
        None => {
            let selection = cv_select_c(&train_x, &train_labels, &t.c_grid, t.folds, t.cv_seed, t.scale, &base)
                .stage("cross-validation")?;
            (selection.best_c, Some(selection))
        }
    };
    let mut test_x = pooled_features(test, &method, &embedding, graphs.as_ref(), split)?;
    if t.scale {
        let scaler = MaxMinScaler::fit(&train_x).stage("scale")?;
        train_x = scaler.transform(&train_x).stage("scale")?;
        test_x = scaler.transform(&test_x).stage("scale")?;
    }
    let model = train_svm(&train_x, &train_labels, &SvmConfig { c_value, ..base }).stage("train")?;
    let predictions = model.predict_all(&test_x);
    let metrics = Metrics::compute(&predictions, &test.labels()).stage("evaluate")?;
    Ok((
        metrics,
        RunDetails {
            embedding: config.embeddings.candidates[chosen].clone(),
            embedding_dim: embedding.dim(),
            candidates,
            train_size: train.len(),
            test_size: test.len(),
            c_value: Some(c_value),
            cv,
            ..Default::default()
        },
    ))
}

fn run_recurrent(
    config: &ExperimentConfig,
    arch: Architecture,
    train: &Dataset,
    test: &Dataset,
    root: &Path,
    seeds: Option<&[u64]>,
) -> Result<(Metrics, RunDetails, Option<LstmParams>), HarnessError> {
    let t = &config.training;
    let spec = t.train_spec();
    spec.validate().stage("train")?;
    let split = config.dataset.split_at_spans;
    let vocab = vocabulary_filter(config, train, test)?;
    let (train_idx, val_idx) = validation_split(&train.labels(), &spec).stage("validation split")?;
    let test_gold: Vec<Label> = test.labels();

    struct Choice {
        index: usize,
        score: f64,
        embedding: EmbeddingMatrix,
    }
    // Choice, test predictions, history, model shape, pad length, parameters.
    type Best = (Choice, Vec<Label>, History, ModelSpec, usize, Option<LstmParams>);
    // With a single candidate and a seed study there is nothing to select,
    // so the selection run is skipped.
    let skip_selection = seeds.is_some() && config.embeddings.candidates.len() == 1;
    let mut candidates = Vec::new();
    let mut best: Option<Best> = None;
    for (i, names) in config.embeddings.candidates.iter().enumerate() {
        let embedding = load_embeddings(config, names, root, vocab.as_ref())?;
        let input = InputSpec {
            arch,
            pad_length: None,
            target_both_sides: config.method.target_both_sides,
        };
        let train_ex = BundleExamples::from_dataset(train, input, &embedding, split).stage("inputs")?;
        let pad = spec.pad_length.unwrap_or_else(|| train_ex.max_length());
        let train_ex = train_ex.with_pad_length(Some(pad));
        let model = ModelSpec {
            arch,
            input_dim: train_ex.step_dim(),
            hidden_dim: spec.hidden_dim.unwrap_or(embedding.dim()),
        };
        if skip_selection {
            let choice = Choice {
                index: i,
                score: 0.0,
                embedding,
            };
            best = Some((choice, Vec::new(), History::default(), model, pad, None));
            continue;
        }
        let (params, history) = train_on_split(&model, &train_ex, &train_idx, &val_idx, &spec).stage("train")?;
        let score = history.epochs[history.best_epoch.max(1) - 1].validation_accuracy;
        candidates.push(CandidateScore {
            embedding: names.clone(),
            score,
        });
        if best.as_ref().is_none_or(|b| score > b.0.score) {
            let test_ex = BundleExamples::from_dataset(test, input, &embedding, split)
                .stage("inputs")?
                .with_pad_length(Some(pad));
            let predictions = predict_all(&params, &test_ex).stage("evaluate")?;
            best = Some((
                Choice {
                    index: i,
                    score,
                    embedding,
                },
                predictions,
                history,
                model,
                pad,
                Some(params),
            ));
        }
    }
    let (choice, mut predictions, history, model, pad, params) = best.expect("at least one candidate");
    if config.embeddings.candidates.len() == 1 {
        candidates.clear();
    }

    let mut study: Option<SeedStudy> = None;
    if let Some(seeds) = seeds {
        let input = InputSpec {
            arch,
            pad_length: Some(pad),
            target_both_sides: config.method.target_both_sides,
        };
        let train_ex = BundleExamples::from_dataset(train, input, &choice.embedding, split).stage("inputs")?;
        let test_ex = BundleExamples::from_dataset(test, input, &choice.embedding, split).stage("inputs")?;
        let result = seed_study(&model, &train_ex, &test_ex, &spec, seeds).stage("seed study")?;
        predictions = result.runs[0].predictions.clone();
        study = Some(result);
    }
    let metrics = Metrics::compute(&predictions, &test_gold).stage("evaluate")?;
    Ok((
        metrics,
        RunDetails {
            embedding: config.embeddings.candidates[choice.index].clone(),
            embedding_dim: choice.embedding.dim(),
            candidates,
            train_size: train.len(),
            test_size: test.len(),
            history: if study.is_none() { Some(history) } else { None },
            pad_length: Some(pad),
            seed_study: study,
            ..Default::default()
        },
        params,
    ))
}
