//! Command-line pipeline: `validate`, `embed`, `fuse`, `train`, `predict`,
//! `evaluate` and `run-all`.
//!
//! Stages hand off through files only. Results go to stdout as JSON, logs go
//! to stderr and are filtered by `CMXQE_LOG`.
//!
//! Exit codes: 0 success, 1 validation findings, 2 I/O or input error,
//! 3 numerical failure.
//!
//! The `--config` file is a flat JSON object whose keys mirror the long
//! flags with underscores (`dataset`, `out_dir`, `seed`, `task`, `provider`,
//! `epochs`, `lr`, `batch_size`, `split_seed`, `fractions`). Relative paths
//! are resolved against the config file's directory. Flags win.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::dataset::{
    label_records, parse_hinge, split_dataset, validate_dataset, DataFormat, DatasetError, LabelError,
    LabeledRecord, ParsedDataset, SplitError, SplitFractions, SplitPart, ValidationReport,
};
use crate::embeddings::{
    pairing_requests, provide_embeddings, read_clsv, write_clsv, EmbeddingError, EmbeddingProvider,
    EmbeddingStore, Pairing, EMBEDDING_DIM,
};
use crate::fusion::{
    build_feature_matrix, load_feature_matrix, save_feature_matrix, FeatureMatrix, FusionError,
};
use crate::metrics::{evaluate, MetricReport, MetricsError};
use crate::nn::{
    load_checkpoint, loss_trace_csv, predict_labels, save_checkpoint, train_matrix, Checkpoint,
    CheckpointError, NnError, TrainConfig, TrainError,
};
use crate::Task;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_SPLIT_SEED: u64 = 42;
pub const LOG_ENV: &str = "CMXQE_LOG";

#[derive(Debug, Parser)]
#[command(name = "cmxqe", version, about = "Quality estimation for code-mixed Hinglish text")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// HinGE dataset, `.csv` or `.json`.
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Initialisation and shuffling seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub task: Option<Task>,
    /// `deterministic:<seed>` or `files:<dir>`.
    #[arg(long, global = true)]
    pub provider: Option<ProviderSpec>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub lr: Option<f64>,
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub split_seed: Option<u64>,
    /// Train, validation and test fractions, e.g. `0.8,0,0.2`.
    #[arg(long, global = true)]
    pub fractions: Option<FractionsArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dataset integrity and print the report.
    Validate,
    /// Write the four CLSV embedding files.
    Embed,
    /// Build the fused feature matrix for one task.
    Fuse {
        /// Directory holding the four CLSV files [default: <out-dir>/embeddings].
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// `train`, `validation`, `test` or `all`.
        #[arg(long, default_value = "all")]
        split: SplitSelection,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a fused matrix.
    Train {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print predicted labels for every row of a matrix.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a checkpoint against gold labels.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        /// JSON object mapping record ids to labels [default: the matrix labels].
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// validate, embed, then fuse, train and evaluate each task.
    RunAll {
        /// Continue past validation findings.
        #[arg(long)]
        ignore_findings: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Deterministic(u64),
    Files(PathBuf),
}

impl ProviderSpec {
    /// The provider serving one pairing.
    pub fn provider_for(&self, pairing: Pairing) -> EmbeddingProvider {
        match self {
            ProviderSpec::Deterministic(seed) => EmbeddingProvider::Deterministic(*seed),
            ProviderSpec::Files(dir) => EmbeddingProvider::File(dir.join(pairing.file_name())),
        }
    }
}

impl FromStr for ProviderSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("deterministic", seed)) => seed
                .parse()
                .map(ProviderSpec::Deterministic)
                .map_err(|e| format!("bad deterministic seed {seed:?}: {e}")),
            Some(("files", dir)) if !dir.is_empty() => Ok(ProviderSpec::Files(dir.into())),
            _ => Err(format!("unknown provider {s:?}, expected deterministic:<seed> or files:<dir>")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionsArg(pub SplitFractions);

impl FromStr for FractionsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad fraction {p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [train, validation, test] = parts[..] else {
            return Err(format!("expected three comma-separated fractions, got {s:?}"));
        };
        SplitFractions::new(train, validation, test).map(FractionsArg).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSelection {
    All,
    Part(SplitPart),
}

impl FromStr for SplitSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            Ok(SplitSelection::All)
        } else {
            s.parse().map(SplitSelection::Part)
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    dataset: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    task: Option<Task>,
    provider: Option<String>,
    epochs: Option<usize>,
    lr: Option<f64>,
    batch_size: Option<usize>,
    split_seed: Option<u64>,
    fractions: Option<[f64; 3]>,
}

/// Flags merged over the optional config file.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dataset: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub task: Option<Task>,
    pub provider: Option<ProviderSpec>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub split_seed: u64,
    pub fractions: SplitFractions,
}

impl PipelineConfig {
    pub fn resolve(args: &SharedArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
                let file: ConfigFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        let rebase = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let provider = match (&args.provider, file.provider) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(s)) => Some(match s.parse().map_err(CliError::Input)? {
                ProviderSpec::Files(dir) => ProviderSpec::Files(rebase(dir)),
                other => other,
            }),
            (None, None) => None,
        };
        let fractions = match (args.fractions, file.fractions) {
            (Some(FractionsArg(f)), _) => f,
            (None, Some([a, b, c])) => SplitFractions::new(a, b, c)?,
            (None, None) => SplitFractions::DEFAULT,
        };
        Ok(PipelineConfig {
            dataset: args.dataset.clone().or(file.dataset.map(rebase)),
            out_dir: args.out_dir.clone().or(file.out_dir.map(rebase)),
            seed: args.seed.or(file.seed).unwrap_or(0),
            task: args.task.or(file.task),
            provider,
            epochs: args.epochs.or(file.epochs),
            learning_rate: args.lr.or(file.lr),
            batch_size: args.batch_size.or(file.batch_size),
            split_seed: args.split_seed.or(file.split_seed).unwrap_or(DEFAULT_SPLIT_SEED),
            fractions,
        })
    }

    pub fn train_config(&self, task: Task) -> TrainConfig {
        let defaults = TrainConfig::for_task(task);
        TrainConfig {
            task,
            epochs: self.epochs.unwrap_or(defaults.epochs),
            batch_size: self.batch_size.unwrap_or(defaults.batch_size),
            seed: self.seed,
            learning_rate: self.learning_rate.unwrap_or(defaults.learning_rate),
        }
    }

    fn dataset(&self) -> Result<&Path, CliError> {
        self.dataset.as_deref().ok_or_else(|| CliError::Input("--dataset is required".into()))
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        self.out_dir.as_deref().ok_or_else(|| CliError::Input("--out-dir is required".into()))
    }

    fn provider(&self) -> Result<&ProviderSpec, CliError> {
        self.provider.as_ref().ok_or_else(|| CliError::Input("--provider is required".into()))
    }

    fn task(&self) -> Result<Task, CliError> {
        self.task.ok_or_else(|| CliError::Input("--task is required".into()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Findings(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Findings(_) => EXIT_FINDINGS,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}

input_error!(DatasetError, LabelError, SplitError, EmbeddingError, FusionError, CheckpointError);

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } | TrainError::Nn(NnError::NonFiniteInput { .. }) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        TrainError::Nn(e).into()
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::DegenerateDistribution { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn load_dataset(path: &Path) -> Result<ParsedDataset, CliError> {
    Ok(parse_hinge(path, DataFormat::from_path(path))?)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialisable report")
}

pub fn cmd_validate(dataset: &Path) -> Result<ValidationReport, CliError> {
    let data = load_dataset(dataset)?;
    let report = validate_dataset(&data);
    log::info!(
        "{} pairs, {} synthetic records, {} violations, {} malformed rows",
        report.pair_count,
        report.synthetic_count,
        report.violation_count,
        report.malformed_row_count
    );
    Ok(report)
}

/// Per pairing: the file written and its key count.
pub fn cmd_embed(
    dataset: &Path,
    provider: &ProviderSpec,
    out_dir: &Path,
) -> Result<Vec<(Pairing, PathBuf, usize)>, CliError> {
    let data = load_dataset(dataset)?;
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let mut written = Vec::with_capacity(Pairing::ALL.len());
    for pairing in Pairing::ALL {
        let requests = pairing_requests(&data, pairing);
        let store = provide_embeddings(&provider.provider_for(pairing), &requests)?;
        let path = out_dir.join(pairing.file_name());
        write_clsv(&store, &path)?;
        log::info!("{}: {} vectors -> {}", pairing.name(), store.len(), path.display());
        written.push((pairing, path, store.len()));
    }
    Ok(written)
}

fn read_stores(dir: &Path, a: Pairing, b: Pairing) -> Result<EmbeddingStore, CliError> {
    let mut store = read_clsv(&dir.join(a.file_name()), EMBEDDING_DIM)?;
    store.extend(read_clsv(&dir.join(b.file_name()), EMBEDDING_DIM)?)?;
    Ok(store)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub selection: SplitSelection,
    pub seed: u64,
    pub fractions: SplitFractions,
}

fn select_records(
    data: &ParsedDataset,
    task: Task,
    split: SplitSpec,
) -> Result<Vec<LabeledRecord>, CliError> {
    let labeled = label_records(&data.synthetic)?;
    if labeled.is_empty() {
        return Err(CliError::Input("dataset is empty: no synthetic records to fuse".into()));
    }
    let records = match split.selection {
        SplitSelection::All => labeled,
        SplitSelection::Part(part) => {
            split_dataset(&labeled, task, split.seed, split.fractions)?.part(part).to_vec()
        }
    };
    if records.is_empty() {
        return Err(CliError::Input(format!("split {:?} is empty", split.selection)));
    }
    Ok(records)
}

pub fn cmd_fuse(
    dataset: &Path,
    embeddings_dir: &Path,
    task: Task,
    split: SplitSpec,
    out: &Path,
) -> Result<FeatureMatrix, CliError> {
    let data = load_dataset(dataset)?;
    let records = select_records(&data, task, split)?;
    let syn = read_stores(embeddings_dir, Pairing::SYN_EN, Pairing::SYN_HI)?;
    let hum = read_stores(embeddings_dir, Pairing::HUM_EN, Pairing::HUM_HI)?;
    let matrix = build_feature_matrix(&records, &syn, &hum, task)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    save_feature_matrix(&matrix, out)?;
    log::info!("{} rows x {} -> {}", matrix.len(), matrix.dim(), out.display());
    Ok(matrix)
}

/// `model.mlpc` -> `model.loss.csv`
pub fn loss_trace_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("loss.csv")
}

pub fn cmd_train(matrix_path: &Path, config: &TrainConfig, out: &Path) -> Result<Checkpoint, CliError> {
    let matrix = load_feature_matrix(matrix_path)?;
    log::info!(
        "training {} on {} rows: {} epochs, batch {}, lr {}, seed {}",
        config.task,
        matrix.len(),
        config.epochs,
        config.batch_size,
        config.learning_rate,
        config.seed
    );
    let (model, loss_trace) = train_matrix(config, &matrix)?;
    let checkpoint = Checkpoint { model, config: *config, loss_trace };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    save_checkpoint(&checkpoint, out)?;
    write_file(&loss_trace_path(out), loss_trace_csv(&checkpoint.loss_trace))?;
    Ok(checkpoint)
}

fn load_for_matrix(checkpoint: &Path, matrix_path: &Path) -> Result<(Checkpoint, FeatureMatrix), CliError> {
    let checkpoint = load_checkpoint(checkpoint)?;
    let matrix = load_feature_matrix(matrix_path)?;
    if checkpoint.config.task != matrix.task {
        return Err(CliError::Input(format!(
            "checkpoint was trained for {} but the matrix is for {}",
            checkpoint.config.task, matrix.task
        )));
    }
    Ok((checkpoint, matrix))
}

/// Predicted labels keyed by record id.
pub fn cmd_predict(checkpoint: &Path, matrix_path: &Path) -> Result<(Task, BTreeMap<String, u8>), CliError> {
    let (checkpoint, matrix) = load_for_matrix(checkpoint, matrix_path)?;
    let labels = predict_labels(&checkpoint.model, &matrix)?;
    Ok((matrix.task, matrix.record_ids().map(str::to_owned).zip(labels).collect()))
}

fn predictions_json(task: Task, predictions: &BTreeMap<String, u8>) -> String {
    to_json(&serde_json::json!({ "task": task, "predictions": predictions }))
}

fn read_gold(path: &Path) -> Result<BTreeMap<String, u8>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let labels = match value.get("labels") {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(labels).map_err(|e| {
        CliError::Input(format!("{}: expected an object of record id to label: {e}", path.display()))
    })
}

pub fn cmd_evaluate(
    checkpoint: &Path,
    matrix_path: &Path,
    gold: Option<&Path>,
) -> Result<MetricReport, CliError> {
    let (checkpoint, matrix) = load_for_matrix(checkpoint, matrix_path)?;
    let y_true = match gold {
        None => matrix.labels.clone(),
        Some(path) => {
            let gold = read_gold(path)?;
            if gold.len() != matrix.len() {
                return Err(CliError::Input(format!(
                    "{} gold labels for {} matrix rows",
                    gold.len(),
                    matrix.len()
                )));
            }
            matrix
                .record_ids()
                .map(|id| {
                    gold.get(id).copied().ok_or_else(|| CliError::Input(format!("no gold label for {id:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let y_pred = predict_labels(&checkpoint.model, &matrix)?;
    Ok(evaluate(&y_true, &y_pred, matrix.task)?)
}

/// Artifacts of one task inside `run-all`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRun {
    pub task: Task,
    pub train_rows: usize,
    pub test_rows: usize,
    pub loss_trace: Vec<f64>,
    pub report: MetricReport,
}

pub fn cmd_run_all(config: &PipelineConfig, ignore_findings: bool) -> Result<String, CliError> {
    let dataset = config.dataset()?;
    let out_dir = config.out_dir()?;
    let provider = config.provider()?;

    let report = cmd_validate(dataset)?;
    write_file(&out_dir.join("validation.json"), to_json(&report) + "\n")?;
    if !report.is_clean() {
        let message = format!(
            "validation found {} violations and {} malformed rows",
            report.violation_count, report.malformed_row_count
        );
        if !ignore_findings {
            return Err(CliError::Findings(message));
        }
        log::warn!("{message}; continuing");
    }

    let embeddings = out_dir.join("embeddings");
    cmd_embed(dataset, provider, &embeddings)?;

    let tasks = match config.task {
        Some(task) => vec![task],
        None => Task::ALL.to_vec(),
    };
    let mut runs = Vec::with_capacity(tasks.len());
    for task in tasks {
        let dir = out_dir.join(task.as_str());
        let split = |part| SplitSpec {
            selection: SplitSelection::Part(part),
            seed: config.split_seed,
            fractions: config.fractions,
        };
        let train_path = dir.join("train.clsv");
        let test_path = dir.join("test.clsv");
        let model_path = dir.join("model.mlpc");
        let train_rows = cmd_fuse(dataset, &embeddings, task, split(SplitPart::Train), &train_path)?.len();
        let test_rows = cmd_fuse(dataset, &embeddings, task, split(SplitPart::Test), &test_path)?.len();
        let checkpoint = cmd_train(&train_path, &config.train_config(task), &model_path)?;
        let report = cmd_evaluate(&model_path, &test_path, None)?;
        write_file(&dir.join("report.json"), report.to_cli_json() + "\n")?;
        runs.push(TaskRun { task, train_rows, test_rows, loss_trace: checkpoint.loss_trace, report });
    }
    let summary = summary_json(&runs);
    write_file(&out_dir.join("summary.json"), summary.clone() + "\n")?;
    Ok(summary)
}

fn summary_json(runs: &[TaskRun]) -> String {
    let mut s = String::from("{");
    for (i, run) in runs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(
            s,
            "\"{}\":{{\"train_rows\":{},\"test_rows\":{},\"epochs\":{},\"final_loss\":{:.6},\"test\":{}}}",
            run.task,
            run.train_rows,
            run.test_rows,
            run.loss_trace.len(),
            run.loss_trace.last().copied().unwrap_or(f64::NAN),
            run.report.to_cli_json()
        )
        .expect("writing to a String");
    }
    s.push('}');
    s
}

/// Runs one parsed invocation, printing results to stdout. Returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let config = PipelineConfig::resolve(&cli.shared)?;
    match cli.command {
        Command::Validate => {
            let report = cmd_validate(config.dataset()?)?;
            println!("{}", to_json(&report));
            Ok(if report.is_clean() { EXIT_OK } else { EXIT_FINDINGS })
        }
        Command::Embed => {
            let out_dir = config.out_dir()?;
            let written = cmd_embed(config.dataset()?, config.provider()?, out_dir)?;
            let files: BTreeMap<String, serde_json::Value> = written
                .into_iter()
                .map(|(p, path, n)| (p.name(), serde_json::json!({ "path": path, "keys": n })))
                .collect();
            println!("{}", to_json(&files));
            Ok(EXIT_OK)
        }
        Command::Fuse { embeddings, split, out } => {
            let embeddings = match embeddings {
                Some(dir) => dir,
                None => config.out_dir()?.join("embeddings"),
            };
            let task = config.task()?;
            let spec = SplitSpec { selection: split, seed: config.split_seed, fractions: config.fractions };
            let matrix = cmd_fuse(config.dataset()?, &embeddings, task, spec, &out)?;
            println!(
                "{}",
                to_json(&serde_json::json!({
                    "task": task,
                    "rows": matrix.len(),
                    "dim": matrix.dim(),
                    "matrix": out,
                }))
            );
            Ok(EXIT_OK)
        }
        Command::Train { matrix, out } => {
            let task = match config.task {
                Some(task) => task,
                None => load_feature_matrix(&matrix)?.task,
            };
            let checkpoint = cmd_train(&matrix, &config.train_config(task), &out)?;
            println!(
                "{}",
                to_json(&serde_json::json!({
                    "task": task,
                    "checkpoint": out,
                    "loss_trace": loss_trace_path(&out),
                    "epochs": checkpoint.loss_trace.len(),
                    "final_loss": checkpoint.loss_trace.last(),
                }))
            );
            Ok(EXIT_OK)
        }
        Command::Predict { checkpoint, matrix, out } => {
            let (task, predictions) = cmd_predict(&checkpoint, &matrix)?;
            let json = predictions_json(task, &predictions);
            match out {
                Some(path) => write_file(&path, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(EXIT_OK)
        }
        Command::Evaluate { checkpoint, matrix, gold } => {
            let report = cmd_evaluate(&checkpoint, &matrix, gold.as_deref())?;
            println!("{}", report.to_cli_json());
            Ok(EXIT_OK)
        }
        Command::RunAll { ignore_findings } => {
            println!("{}", cmd_run_all(&config, ignore_findings)?);
            Ok(EXIT_OK)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).target(env_logger::Target::Stderr).try_init();
}

/// Entry point of the `cmxqe` binary.
pub fn main() -> i32 {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(cli)
}
