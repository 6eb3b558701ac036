use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tdsa_core::corpus::{dataset_stats, parse_files, read_jsonl, write_jsonl, Dataset, Label, SourceFormat};
use tdsa_core::embedding::load_text_embeddings;
use tdsa_core::harness::{
    corpus_vocabulary, data_root, load_embeddings, load_graphs, load_lexicon, pooled_features, report,
    resolve_path, run_experiment, run_recurrent_experiment, run_seed_study, table2, table3, ExperimentConfig,
    ExperimentRecord, LexiconCounts, LexiconName, LexiconsConfig, Metrics, MethodKind, Report, ReportShape,
    ResultsStore,
};
use tdsa_core::linear::{cv_select_c, train_svm, MaxMinScaler, SvmConfig, DEFAULT_C_GRID};
use tdsa_core::pooling::{read_feature_records, write_feature_records, Family, FeatureFileHeader, MethodSpec};
use tdsa_core::recurrent::Architecture;
use tdsa_core::text::tokenize;

#[derive(Parser)]
#[command(name = "tdsa", version, about = "Target-dependent sentiment analysis benchmarks")]
struct Cli {
    /// Root for relative data paths; overrides the TDSA_DATA_DIR variable.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a source corpus to the common JSONL format.
    Parse {
        #[arg(long)]
        format: SourceFormat,
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Dataset name; defaults to the output file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Print dataset statistics, one row per JSONL file.
    Stats {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        output: OutputFormat,
    },
    /// Add token arrays to every instance of a JSONL file.
    Tokenize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print positive and negative word counts of the lexicons and their unions.
    LexiconStats {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        mpqa: Option<String>,
        #[arg(long)]
        hl_pos: Option<String>,
        #[arg(long)]
        hl_neg: Option<String>,
        #[arg(long)]
        nrc: Option<String>,
        #[command(flatten)]
        output: OutputFormat,
    },
    /// Describe one configured embedding source.
    EmbedInfo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        name: String,
        /// Report how many tokens of this dataset have a vector.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Compute pooled feature vectors for a dataset.
    Features(FeaturesArgs),
    /// Train a linear SVM on a feature file.
    TrainSvm {
        #[arg(long)]
        features: PathBuf,
        /// Dataset the features were computed from, for the labels.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        no_scale: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pick C by stratified k-fold cross-validation.
    Cv {
        #[arg(long)]
        features: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_scale: bool,
    },
    /// Train one LSTM model from a config and save its parameters.
    TrainLstm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        arch: Option<Architecture>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Train an LSTM under many seeds and export the score distribution.
    Multiseed {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        arch: Option<Architecture>,
        /// Use seeds 1..=N.
        #[arg(long, conflicts_with = "seed_list")]
        seeds: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        seed_list: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Run one experiment and store its record.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        results: PathBuf,
    },
    /// Build a table or figure export from stored records.
    Report {
        #[arg(long)]
        shape: ReportShape,
        #[arg(long)]
        glob: String,
        #[command(flatten)]
        output: OutputFormat,
    },
}

#[derive(Args)]
struct OutputFormat {
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

impl OutputFormat {
    fn render(&self, report: &Report) -> Result<String> {
        Ok(if self.json {
            report.to_json()?
        } else if self.csv {
            report.csv()
        } else {
            report.text()
        })
    }
}

#[derive(Args)]
struct FeaturesArgs {
    /// Config supplying embedding sources and lexicon paths.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    method: Family,
    #[arg(long, value_delimiter = ',')]
    lexicon: Vec<String>,
    /// Sources to concatenate; defaults to the config's first candidate.
    #[arg(long, value_delimiter = ',')]
    embeddings: Vec<String>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    conll: Option<PathBuf>,
    #[arg(long)]
    dep_depth: Option<usize>,
    /// Tokenize without forcing boundaries at the target span edges.
    #[arg(long)]
    no_span_split: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = execute(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn execute(cli: Cli) -> Result<()> {
    let dirs = DataDir(cli.data_dir);
    match cli.command {
        Command::Parse {
            format,
            inputs,
            out,
            name,
        } => parse(format, &inputs, &out, name),
        Command::Stats { inputs, output } => {
            let stats = inputs
                .iter()
                .map(|p| dataset_stats(&read_dataset(p)?).with_context(|| p.display().to_string()))
                .collect::<Result<Vec<_>>>()?;
            print!("{}", output.render(&table2(&stats))?);
            Ok(())
        }
        Command::Tokenize { input, out } => tokenize_file(&input, &out),
        Command::LexiconStats {
            config,
            mpqa,
            hl_pos,
            hl_neg,
            nrc,
            output,
        } => {
            let (mut paths, root) = match &config {
                Some(c) => {
                    let config = read_config(c)?;
                    (config.lexicons, dirs.root(Some(c)))
                }
                None => (LexiconsConfig::default(), dirs.root(None)),
            };
            paths.mpqa_path = mpqa.or(paths.mpqa_path);
            paths.hl_pos_path = hl_pos.or(paths.hl_pos_path);
            paths.hl_neg_path = hl_neg.or(paths.hl_neg_path);
            paths.nrc_path = nrc.or(paths.nrc_path);
            let rows = lexicon_rows(&paths, &root)?;
            print!("{}", output.render(&table3(&rows))?);
            Ok(())
        }
        Command::EmbedInfo { config, name, input } => embed_info(&dirs, &config, &name, input.as_deref()),
        Command::Features(args) => features(&dirs, args),
        Command::TrainSvm {
            features,
            input,
            c,
            no_scale,
            out,
        } => train_svm_cmd(&features, &input, c, !no_scale, &out),
        Command::Cv {
            features,
            input,
            grid,
            folds,
            seed,
            no_scale,
        } => {
            let (x, y) = labelled_features(&features, &input)?;
            let grid = if grid.is_empty() { DEFAULT_C_GRID.to_vec() } else { grid };
            let base = SvmConfig { seed, ..Default::default() };
            let selection = cv_select_c(&x, &y, &grid, folds, seed, !no_scale, &base)?;
            for s in &selection.scores {
                println!("C={:<10} mean accuracy {:.4}", s.c_value, s.mean_accuracy);
            }
            println!("best C={}", selection.best_c);
            Ok(())
        }
        Command::TrainLstm {
            config,
            arch,
            seed,
            out,
            results,
        } => {
            let mut exp = lstm_config(&config, arch)?;
            if let Some(seed) = seed {
                exp = exp.with_seed(seed);
            }
            let (record, params) = run_recurrent_experiment(&exp, &dirs.root(Some(&config)))?;
            params.write(BufWriter::new(create(&out)?))?;
            print_metrics(&record.metrics);
            if let Some(dir) = results {
                store(&dir, &record)?;
            }
            Ok(())
        }
        Command::Multiseed {
            config,
            arch,
            seeds,
            seed_list,
            out,
            results,
        } => {
            let exp = lstm_config(&config, arch)?;
            let seeds: Vec<u64> = match seeds {
                Some(n) => (1..=n).collect(),
                None if !seed_list.is_empty() => seed_list,
                None if !exp.training.seeds.is_empty() => exp.training.seeds.clone(),
                None => bail!("give --seeds N, --seed-list or training.seeds in the config"),
            };
            let record = run_seed_study(&exp, &dirs.root(Some(&config)), &seeds)?;
            let dist = report(std::slice::from_ref(&record), ReportShape::FigDist)?;
            fs::write(&out, dist.to_json()?).with_context(|| out.display().to_string())?;
            if let Some(study) = &record.details.seed_study {
                let s = &study.summary;
                println!(
                    "macro-F1 over {} seeds: mean {:.4} max {:.4} min {:.4} std {:.4}",
                    study.runs.len(),
                    s.mean,
                    s.max,
                    s.min,
                    s.std
                );
            }
            if let Some(dir) = results {
                store(&dir, &record)?;
            }
            Ok(())
        }
        Command::Run { config, results } => {
            let exp = read_config(&config)?;
            let root = dirs.root(Some(&config));
            let record = if exp.training.seeds.is_empty() {
                run_experiment(&exp, &root)?
            } else {
                run_seed_study(&exp, &root, &exp.training.seeds)?
            };
            print_metrics(&record.metrics);
            store(&results, &record)
        }
        Command::Report { shape, glob, output } => {
            if matches!(shape, ReportShape::Table2 | ReportShape::Table3) {
                bail!("{shape:?} is built from corpora and lexicons; use `tdsa stats` or `tdsa lexicon-stats`");
            }
            let mut records = Vec::new();
            for entry in glob::glob(&glob).with_context(|| format!("bad pattern {glob:?}"))? {
                let path = entry?;
                records.push(ResultsStore::read(&path).with_context(|| path.display().to_string())?);
            }
            print!("{}", output.render(&report(&records, shape)?)?);
            Ok(())
        }
    }
}

struct DataDir(Option<PathBuf>);

impl DataDir {
    /// Explicit flag, then the environment, then the config file's directory.
    fn root(&self, config: Option<&Path>) -> PathBuf {
        if let Some(dir) = &self.0 {
            return dir.clone();
        }
        let fallback = config
            .and_then(Path::parent)
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        data_root(&fallback)
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_toml(&text).with_context(|| path.display().to_string())
}

fn lstm_config(path: &Path, arch: Option<Architecture>) -> Result<ExperimentConfig> {
    let mut exp = read_config(path)?;
    if let Some(arch) = arch {
        exp.method.name = MethodKind::Recurrent(arch);
    }
    if !matches!(exp.method.name, MethodKind::Recurrent(_)) {
        bail!("method {} is not an LSTM; pass --arch", exp.method.name.as_str());
    }
    Ok(exp)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map_or("dataset", |s| s.trim_end_matches(".tokens"));
    read_jsonl(name, bytes.as_slice()).with_context(|| path.display().to_string())
}

fn parse(format: SourceFormat, inputs: &[PathBuf], out: &Path, name: Option<String>) -> Result<()> {
    let files = inputs
        .iter()
        .map(|p| fs::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let name = name.unwrap_or_else(|| out.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string());
    let outcome = parse_files(format, &name, &files)?;
    let mut sink = BufWriter::new(create(out)?);
    write_jsonl(&outcome.dataset, &mut sink)?;
    sink.flush()?;
    let r = &outcome.report;
    eprintln!(
        "{} instances written; {} rejected, {} conflict dropped, {} without span, {} located by search more than once",
        outcome.dataset.len(),
        r.rejected.len(),
        r.conflict_dropped,
        r.missing_span,
        r.multi_occurrence.len()
    );
    Ok(())
}

fn tokenize_file(input: &Path, out: &Path) -> Result<()> {
    let dataset = read_dataset(input)?;
    let mut sink = BufWriter::new(create(out)?);
    for instance in dataset.instances() {
        let mut value = serde_json::to_value(instance)?;
        let tokens = tokenize(instance.text());
        value["tokens"] = json!(tokens.iter().map(|t| &t.surface).collect::<Vec<_>>());
        value["token_spans"] = json!(tokens.iter().map(|t| t.span).collect::<Vec<_>>());
        serde_json::to_writer(&mut sink, &value)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

fn lexicon_rows(paths: &LexiconsConfig, root: &Path) -> Result<Vec<LexiconCounts>> {
    let mut available = Vec::new();
    if paths.hl_pos_path.is_some() && paths.hl_neg_path.is_some() {
        available.push(LexiconName::Hl);
    }
    if paths.mpqa_path.is_some() {
        available.push(LexiconName::Mpqa);
    }
    if paths.nrc_path.is_some() {
        available.push(LexiconName::Nrc);
    }
    if available.is_empty() {
        bail!("no lexicon paths given");
    }
    let mut groups: Vec<(String, Vec<LexiconName>)> =
        available.iter().map(|&l| (l.display().to_string(), vec![l])).collect();
    if available.contains(&LexiconName::Mpqa) && available.contains(&LexiconName::Hl) {
        groups.push(("MPQA & HL".into(), vec![LexiconName::Mpqa, LexiconName::Hl]));
    }
    if available.len() == 3 {
        groups.push(("All three".into(), available.clone()));
    }
    groups
        .into_iter()
        .map(|(name, members)| {
            let lexicon = load_lexicon(paths, &members, root)?;
            let (positive, negative) = lexicon.counts(false);
            let (positive_lowered, negative_lowered) = lexicon.counts(true);
            Ok(LexiconCounts {
                name,
                positive,
                positive_lowered,
                negative,
                negative_lowered,
            })
        })
        .collect()
}

fn embed_info(dirs: &DataDir, config: &Path, name: &str, input: Option<&Path>) -> Result<()> {
    let exp = read_config(config)?;
    let source = exp
        .embeddings
        .sources
        .get(name)
        .ok_or_else(|| anyhow!("embeddings.{name} is not defined in {}", config.display()))?;
    let path = resolve_path(&dirs.root(Some(config)), &source.path);
    let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let loaded = load_text_embeddings(&bytes)?;
    println!("name        {name}");
    println!("path        {}", path.display());
    println!("dim         {}", loaded.matrix.dim());
    println!("words       {}", loaded.matrix.len());
    println!("duplicates  {}", loaded.duplicates);
    println!("header line {}", if loaded.header_skipped { "yes" } else { "no" });
    if let Some(input) = input {
        let dataset = read_dataset(input)?;
        let vocab = corpus_vocabulary(&[&dataset], true)?;
        let covered = vocab.iter().filter(|w| loaded.matrix.contains(w)).count();
        println!(
            "coverage    {covered}/{} token types ({:.2}%)",
            vocab.len(),
            100.0 * covered as f64 / vocab.len().max(1) as f64
        );
    }
    Ok(())
}

fn lexicon_name(s: &str) -> Result<LexiconName> {
    match s.to_ascii_lowercase().as_str() {
        "mpqa" => Ok(LexiconName::Mpqa),
        "hl" => Ok(LexiconName::Hl),
        "nrc" => Ok(LexiconName::Nrc),
        other => bail!("unknown lexicon {other:?} (expected mpqa, hl or nrc)"),
    }
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn features(dirs: &DataDir, args: FeaturesArgs) -> Result<()> {
    let exp = read_config(&args.config)?;
    let root = dirs.root(Some(&args.config));
    let split = !args.no_span_split;
    let dataset = read_dataset(&args.input)?;
    let lexicon = if args.method.needs_lexicon() {
        let names = args.lexicon.iter().map(|s| lexicon_name(s)).collect::<Result<Vec<_>>>()?;
        if names.is_empty() {
            bail!("{} needs --lexicon", args.method);
        }
        Some(Arc::new(load_lexicon(&exp.lexicons, &names, &root)?))
    } else {
        None
    };
    let mut method = MethodSpec::new(args.method, lexicon)?;
    method.dep_depth = args.dep_depth;
    let graphs = match (&args.conll, args.method.needs_graph()) {
        (Some(path), true) => Some(load_graphs(Path::new("."), &path.to_string_lossy())?),
        (None, true) => bail!("{} needs --conll", args.method),
        _ => None,
    };
    let names = if args.embeddings.is_empty() {
        exp.embeddings.candidates[0].clone()
    } else {
        args.embeddings.clone()
    };
    let embedding = load_embeddings(&exp, &names, &root, None::<&HashSet<String>>)?;
    let rows = pooled_features(&dataset, &method, &embedding, graphs.as_ref(), split)?;
    let mut sink = BufWriter::new(create(&args.out)?);
    write_feature_records(&mut sink, &rows)?;
    let layout = method.layout(embedding.dim());
    let header = FeatureFileHeader {
        method: args.method,
        dim: layout.len(),
        records: rows.len(),
        ids: dataset.instances().iter().map(|i| i.id().to_string()).collect(),
        layout,
    };
    let meta = sidecar(&args.out, ".json");
    fs::write(&meta, serde_json::to_string_pretty(&header)?).with_context(|| meta.display().to_string())?;
    eprintln!("{} records of width {} written", header.records, header.dim);
    Ok(())
}

/// Feature rows paired with the gold labels of the instances they came from.
fn labelled_features(features: &Path, input: &Path) -> Result<(Vec<Vec<f64>>, Vec<Label>)> {
    let rows = read_feature_records(File::open(features).with_context(|| features.display().to_string())?)?;
    let meta = sidecar(features, ".json");
    let header: FeatureFileHeader =
        serde_json::from_slice(&fs::read(&meta).with_context(|| format!("reading {}", meta.display()))?)?;
    if header.records != rows.len() {
        bail!("{} lists {} records, feature file has {}", meta.display(), header.records, rows.len());
    }
    let dataset = read_dataset(input)?;
    let labels: std::collections::HashMap<&str, Label> =
        dataset.instances().iter().map(|i| (i.id(), i.label())).collect();
    let y = header
        .ids
        .iter()
        .map(|id| labels.get(id.as_str()).copied().ok_or_else(|| anyhow!("instance {id} not in {}", input.display())))
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, y))
}

fn train_svm_cmd(features: &Path, input: &Path, c: f64, scale: bool, out: &Path) -> Result<()> {
    let (mut x, y) = labelled_features(features, input)?;
    if scale {
        let scaler = MaxMinScaler::fit(&x)?;
        x = scaler.transform(&x)?;
        let meta = sidecar(out, ".scaler.json");
        fs::write(&meta, serde_json::to_string(&scaler)?).with_context(|| meta.display().to_string())?;
    }
    let config = SvmConfig::with_c(c);
    let model = train_svm(&x, &y, &config)?;
    model.write(BufWriter::new(create(out)?), &config)?;
    let predictions = model.predict_all(&x);
    print_metrics(&Metrics::compute(&predictions, &y)?);
    Ok(())
}

fn print_metrics(m: &Metrics) {
    println!("accuracy {:.4}  macro-F1 {:.4}", m.accuracy, m.macro_f1);
}

fn store(dir: &Path, record: &ExperimentRecord) -> Result<()> {
    let path = ResultsStore::open(dir)?.write(record)?;
    println!("record {}", path.display());
    Ok(())
}
