//! The `vecot` command line.
//!
//! Every command that runs the pipeline writes `traces.jsonl`,
//! `results.jsonl` and `manifest.json` into `--out`. Traces and results are
//! appended one line per instance, in dataset order, as instances finish.
//!
//! Exit codes: 0 success, 1 configuration, schema or I/O errors, 2 missing
//! credentials or an unreachable backend.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{EditingSection, EvalSection, RetrievalSection, RunConfig, SamplingSection};

use crate::backend::{record_fixture, Backend, BackendError, HttpBackend, ScriptedBackend, ScriptedFixture};
use crate::editor::{EditorError, FailureKind, Method, Pipeline, PipelineConfig, PipelineTrace};
use crate::eval::{self, Aggregates, EvalError, EvalResult, Instance};
use crate::prompting::{PromptError, Task, TemplateSet};
use crate::retrieval::{
    DatasetRetriever, FixtureRetriever, OpenCorpusRetriever, RecordingRetriever, RetrievalError, Retriever,
    RetrieverFixture, Source, WebSearchRetriever, WikipediaRetriever,
};

/// File names inside a fixture directory.
pub const BACKEND_FIXTURE: &str = "backend.json";
pub const RETRIEVER_FIXTURE: &str = "retriever.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Credential(String),
    #[error("{0}")]
    Unreachable(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Credential(_) | CliError::Unreachable(_) => 2,
            _ => 1,
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<EditorError> for CliError {
    fn from(e: EditorError) -> Self {
        match e {
            EditorError::Backend(b) => b.into(),
            EditorError::Retrieval(r) => r.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::MissingCredential(_) => CliError::Credential(e.to_string()),
            BackendError::Transport(_) | BackendError::Quota(_) => CliError::Unreachable(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<RetrievalError> for CliError {
    fn from(e: RetrievalError) -> Self {
        match e {
            RetrievalError::Config(ref m) if m.contains(crate::retrieval::SEARCH_KEY_ENV) => {
                CliError::Credential(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vecot",
    version,
    about = "Verify-and-edit chain-of-thought runs, baselines and analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verify-and-edit over a dataset.
    Run(RunArgs),
    /// Run a baseline: standard, cot or cot-sc.
    Baseline {
        #[arg(long, value_enum)]
        mode: BaselineMode,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sweep the edit threshold over one set of samples and write ablation.csv.
    Ablate {
        /// Comma-separated thresholds; default 0 to n in steps of 0.5.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Histogram of consistency scores for correct and incorrect rows.
    Density {
        #[arg(long)]
        results: PathBuf,
        /// Number of sampled paths; defaults to the largest n in the file.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Balanced challenge-set ids from a results file.
    Subsample {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Record live calls into a fixture directory, or replay and compare.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum FixtureAction {
    /// Run live and save every backend and retriever call under --record.
    Record {
        #[arg(long, value_enum, default_value_t = BaselineMode::VerifyEdit)]
        mode: BaselineMode,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Replay from --replay and check the traces against a previous run.
    Replay {
        #[arg(long, value_enum, default_value_t = BaselineMode::VerifyEdit)]
        mode: BaselineMode,
        /// traces.jsonl the replay must reproduce byte for byte.
        #[arg(long)]
        expected: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMode {
    Standard,
    Cot,
    CotSc,
    /// Only meaningful for `fixtures`; `run` is the usual way to get it.
    VerifyEdit,
}

impl From<BaselineMode> for Method {
    fn from(m: BaselineMode) -> Self {
        match m {
            BaselineMode::Standard => Method::Standard,
            BaselineMode::Cot => Method::Cot,
            BaselineMode::CotSc => Method::CotSc,
            BaselineMode::VerifyEdit => Method::VerifyEdit,
        }
    }
}

/// Flags shared by every pipeline command. Each overrides the matching
/// config-file key.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config with sections backend, sampling, editing, retrieval, eval.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Newline-separated ids selecting and ordering instances.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// wikipedia, opencorpus, websearch or dataset.
    #[arg(long)]
    pub retriever: Option<Source>,
    /// JSON-lines corpus for the opencorpus retriever.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory with backend.json (and retriever.json) to replay from.
    #[arg(long, conflicts_with = "record")]
    pub replay: Option<PathBuf>,
    /// Directory to save backend.json and retriever.json into.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Directory overriding individual prompt templates (<task>/<kind>.txt).
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

impl RunArgs {
    /// Loads the config file (if any) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let eval = &mut cfg.eval;
        if let Some(t) = self.task {
            eval.task = Some(t);
        }
        if let Some(p) = &self.dataset {
            eval.dataset = Some(p.clone());
        }
        if let Some(p) = &self.index {
            eval.index = Some(p.clone());
        }
        if let Some(p) = self.parallel {
            eval.parallel = p;
        }
        if let Some(s) = self.seed {
            eval.seed = s;
        }
        if let Some(p) = &self.prompts {
            eval.prompts_dir = Some(p.clone());
        }
        if let Some(r) = self.retriever {
            cfg.retrieval.source = r;
        }
        if let Some(c) = &self.corpus {
            cfg.retrieval.corpus = Some(c.clone());
        }
        if let Some(k) = self.k {
            cfg.retrieval.ranker.k = k;
        }
        if let Some(n) = self.n {
            cfg.sampling.n_samples = n;
        }
        if let Some(t) = self.temperature {
            cfg.sampling.temperature = t;
        }
        if let Some(t) = self.threshold {
            cfg.editing.threshold = Some(t);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Serialize)]
struct DatasetRef {
    path: PathBuf,
    sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<PathBuf>,
    instances: usize,
}

#[derive(Debug, Serialize)]
struct FixtureRefs {
    #[serde(skip_serializing_if = "Option::is_none")]
    replay: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    record: Option<PathBuf>,
}

/// Written next to every trace file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    command: String,
    method: Method,
    config: RunConfig,
    dataset: DatasetRef,
    fixtures: FixtureRefs,
    seed: u64,
    started_at_unix_ms: u128,
    finished_at_unix_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregates: Option<Aggregates>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    ablation: Vec<ThresholdAggregates>,
    outputs: Vec<String>,
    version: &'static str,
}

#[derive(Debug, Serialize)]
struct ThresholdAggregates {
    threshold: f64,
    aggregates: Aggregates,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything a pipeline command needs, built from resolved config.
struct Session {
    config: RunConfig,
    task: Task,
    instances: Vec<Instance>,
    pipeline: Pipeline,
    dataset: DatasetRef,
    replaying: bool,
    backend_sink: Option<Arc<Mutex<ScriptedFixture>>>,
    retriever_sink: Option<Arc<Mutex<RetrieverFixture>>>,
}

fn local_retriever(cfg: &RunConfig) -> Result<Option<Arc<dyn Retriever>>, CliError> {
    Ok(match cfg.retrieval.source {
        Source::Dataset => Some(Arc::new(DatasetRetriever)),
        Source::OpenCorpus => {
            let path = cfg
                .retrieval
                .corpus
                .as_ref()
                .ok_or_else(|| CliError::Config("--retriever opencorpus needs --corpus".into()))?;
            Some(Arc::new(OpenCorpusRetriever::from_jsonl(path)?))
        }
        Source::Wikipedia | Source::WebSearch => None,
    })
}

fn live_retriever(cfg: &RunConfig) -> Result<Arc<dyn Retriever>, CliError> {
    if let Some(local) = local_retriever(cfg)? {
        return Ok(local);
    }
    Ok(match cfg.retrieval.source {
        Source::Wikipedia => Arc::new(WikipediaRetriever::new(cfg.retrieval.wikipedia.clone())),
        Source::WebSearch => Arc::new(WebSearchRetriever::from_env(cfg.retrieval.websearch.clone())?),
        Source::Dataset | Source::OpenCorpus => unreachable!("handled as local"),
    })
}

impl Session {
    fn open(args: &RunArgs) -> Result<Self, CliError> {
        let config = args.resolve()?;
        let task = config.task()?;
        let dataset_path = config
            .eval
            .dataset
            .clone()
            .ok_or_else(|| CliError::Config("--dataset is required".into()))?;
        let mut instances = eval::load_dataset(&dataset_path, task)?;
        if let Some(index) = &config.eval.index {
            instances = eval::apply_index(instances, &eval::load_index(index)?)?;
        }
        let dataset = DatasetRef {
            sha256: sha256_file(&dataset_path)?,
            path: dataset_path,
            index: config.eval.index.clone(),
            instances: instances.len(),
        };
        let templates = Arc::new(match &config.eval.prompts_dir {
            Some(dir) => TemplateSet::load_dir(dir)?,
            None => TemplateSet::builtin(),
        });

        let mut backend_sink = None;
        let mut retriever_sink = None;
        let (backend, retriever): (Arc<dyn Backend>, Arc<dyn Retriever>) = if let Some(dir) = &args.replay {
            let fixture = ScriptedFixture::load(&dir.join(BACKEND_FIXTURE))?;
            let retriever_path = dir.join(RETRIEVER_FIXTURE);
            let local = local_retriever(&config)?;
            let retriever: Arc<dyn Retriever> = match (retriever_path.exists(), local) {
                (true, Some(local)) => {
                    Arc::new(FixtureRetriever::new(RetrieverFixture::load(&retriever_path)?).with_fallback(local))
                }
                (true, None) => Arc::new(FixtureRetriever::new(RetrieverFixture::load(&retriever_path)?)),
                (false, Some(local)) => local,
                (false, None) => {
                    return Err(CliError::Config(format!(
                        "replaying a {} retriever needs {}",
                        config.retrieval.source,
                        retriever_path.display()
                    )))
                }
            };
            (Arc::new(ScriptedBackend::new(fixture)), retriever)
        } else {
            let live: Arc<dyn Backend> = Arc::new(HttpBackend::from_env(config.backend.clone())?);
            let retriever = live_retriever(&config)?;
            if args.record.is_some() {
                let sink = Arc::new(Mutex::new(ScriptedFixture::default()));
                let rsink = Arc::new(Mutex::new(RetrieverFixture::default()));
                backend_sink = Some(sink.clone());
                retriever_sink = Some(rsink.clone());
                (
                    Arc::new(record_fixture(live, sink)),
                    Arc::new(RecordingRetriever::new(retriever, rsink)),
                )
            } else {
                (live, retriever)
            }
        };

        let replaying = args.replay.is_some();
        let pipeline_config = PipelineConfig {
            task,
            n_samples: config.sampling.n_samples,
            sample_temperature: config.sampling.temperature,
            edit_threshold: config.editing.threshold,
            ranker: config.retrieval.ranker.clone(),
            max_tokens: config.sampling.max_tokens,
            record_timings: !replaying,
        };
        let pipeline = Pipeline::new(backend, retriever, templates, pipeline_config)?;
        Ok(Self {
            config,
            task,
            instances,
            pipeline,
            dataset,
            replaying,
            backend_sink,
            retriever_sink,
        })
    }

    fn save_recordings(&self, dir: Option<&Path>) -> Result<(), CliError> {
        let Some(dir) = dir else { return Ok(()) };
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        if let Some(sink) = &self.backend_sink {
            sink.lock()
                .unwrap_or_else(|e| e.into_inner())
                .save(&dir.join(BACKEND_FIXTURE))?;
        }
        if let Some(sink) = &self.retriever_sink {
            sink.lock()
                .unwrap_or_else(|e| e.into_inner())
                .save(&dir.join(RETRIEVER_FIXTURE))?;
        }
        Ok(())
    }

    fn manifest(&self, command: &str, method: Method, args: &RunArgs, started: u128) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            method,
            config: self.config.clone(),
            dataset: DatasetRef {
                path: self.dataset.path.clone(),
                sha256: self.dataset.sha256.clone(),
                index: self.dataset.index.clone(),
                instances: self.dataset.instances,
            },
            fixtures: FixtureRefs {
                replay: args.replay.clone(),
                record: args.record.clone(),
            },
            seed: self.config.eval.seed,
            started_at_unix_ms: started,
            finished_at_unix_ms: now_ms(),
            aggregates: None,
            ablation: Vec::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn write_json_line<T: Serialize>(out: &mut impl Write, path: &Path, value: &T) -> Result<(), CliError> {
    let line = serde_json::to_string(value).map_err(|e| CliError::io(path, e))?;
    writeln!(out, "{line}").map_err(|e| CliError::io(path, e))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

fn write_manifest(out_dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::io(&path, e))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn print_aggregates(task: Task, agg: &Aggregates) {
    let auc = agg.auc.map_or("n/a".to_string(), |a| format!("{:.4}", a));
    println!(
        "instances={} failed={} {}={:.4} auc={} edit_fraction={:.4} cost_usd={:.4}",
        agg.instances,
        agg.failed,
        eval::metric_name(task),
        agg.em_or_accuracy,
        auc,
        agg.edit_fraction,
        agg.total_cost_usd
    );
}

fn all_transport_failures(traces: &[PipelineTrace]) -> bool {
    !traces.is_empty()
        && traces
            .iter()
            .all(|t| t.failure.as_ref().is_some_and(|f| f.kind == FailureKind::Transport))
}

/// Runs `method` over the dataset and writes traces, results and manifest.
pub fn cmd_pipeline(command: &str, method: Method, args: &RunArgs) -> Result<Aggregates, CliError> {
    let started = now_ms();
    let session = Session::open(args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let traces_path = args.out.join("traces.jsonl");
    let results_path = args.out.join("results.jsonl");
    let mut traces_out = create(&traces_path)?;
    let mut results_out = create(&results_path)?;
    let cost_model = session.config.eval.cost;

    let mut rows: Vec<EvalResult> = Vec::with_capacity(session.instances.len());
    let mut write_err: Option<CliError> = None;
    let traces = session
        .pipeline
        .run_batch(&session.instances, method, session.config.eval.parallel, |i, trace| {
            let row = eval::score_trace(trace, &session.instances[i], method, &cost_model);
            if write_err.is_none() {
                let res = write_json_line(&mut traces_out, &traces_path, trace)
                    .and_then(|_| write_json_line(&mut results_out, &results_path, &row));
                write_err = res.err();
            }
            log::info!("{} {} -> {:?}", i, trace.id, trace.final_answer);
            rows.push(row);
        });
    if let Some(e) = write_err {
        return Err(e);
    }
    session.save_recordings(args.record.as_deref())?;

    let agg = eval::aggregate(&rows);
    let mut manifest = session.manifest(command, method, args, started);
    manifest.aggregates = Some(agg.clone());
    manifest.outputs = vec!["traces.jsonl".into(), "results.jsonl".into()];
    write_manifest(&args.out, &manifest)?;
    print_aggregates(session.task, &agg);
    if all_transport_failures(&traces) && !session.replaying {
        return Err(CliError::Unreachable(format!(
            "every instance failed to reach the backend: {}",
            traces[0].failure.as_ref().map(|f| f.message.as_str()).unwrap_or("")
        )));
    }
    Ok(agg)
}

/// Default sweep: 0 to n in steps of 0.5.
pub fn default_thresholds(n: usize) -> Vec<f64> {
    (0..=2 * n).map(|i| i as f64 * 0.5).collect()
}

pub fn cmd_ablate(thresholds: Option<&[f64]>, args: &RunArgs) -> Result<(), CliError> {
    let started = now_ms();
    let session = Session::open(args)?;
    let thresholds = thresholds
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| default_thresholds(session.config.sampling.n_samples));
    let rows = eval::ablate_threshold(
        &session.pipeline,
        &session.instances,
        &thresholds,
        session.config.eval.parallel,
        &session.config.eval.cost,
    )?;
    session.save_recordings(args.record.as_deref())?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let csv_path = args.out.join("ablation.csv");
    eval::write_ablation_csv(create(&csv_path)?, &rows, session.task)?;

    let mut manifest = session.manifest("ablate", Method::VerifyEdit, args, started);
    manifest.ablation = rows
        .iter()
        .map(|r| ThresholdAggregates {
            threshold: r.threshold,
            aggregates: r.aggregates.clone(),
        })
        .collect();
    manifest.outputs = vec!["ablation.csv".into()];
    write_manifest(&args.out, &manifest)?;
    for r in &rows {
        print!("threshold={} ", r.threshold);
        print_aggregates(session.task, &r.aggregates);
    }
    Ok(())
}

pub fn cmd_density(results: &Path, n: Option<usize>, out: &Path) -> Result<(), CliError> {
    let rows: Vec<EvalResult> = eval::read_jsonl(results)?;
    let n = n.unwrap_or_else(|| rows.iter().map(|r| r.n).max().unwrap_or(0));
    let bins = eval::consistency_density(&rows, n);
    eval::write_density_csv(create(out)?, &bins)?;
    println!("{} bins written to {}", bins.len(), out.display());
    Ok(())
}

pub fn cmd_subsample(results: &Path, target: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    let rows: Vec<EvalResult> = eval::read_jsonl(results)?;
    let ids = eval::balanced_subsample(&rows, target, seed)?;
    eval::write_index(out, &ids)?;
    println!("{} ids written to {}", ids.len(), out.display());
    Ok(())
}

fn cmd_replay_check(method: Method, expected: &Path, args: &RunArgs) -> Result<(), CliError> {
    if args.replay.is_none() {
        return Err(CliError::Config("fixtures replay needs --replay DIR".into()));
    }
    cmd_pipeline("fixtures replay", method, args)?;
    let got_path = args.out.join("traces.jsonl");
    let got = std::fs::read(&got_path).map_err(|e| CliError::io(&got_path, e))?;
    let want = std::fs::read(expected).map_err(|e| CliError::io(expected, e))?;
    if got != want {
        let line = got
            .split(|b| *b == b'\n')
            .zip(want.split(|b| *b == b'\n'))
            .position(|(a, b)| a != b)
            .map_or("length".to_string(), |i| format!("line {}", i + 1));
        return Err(CliError::Mismatch(format!(
            "replayed traces differ from {} at {line}",
            expected.display()
        )));
    }
    println!("replay matches {}", expected.display());
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_pipeline("run", Method::VerifyEdit, &args).map(|_| ()),
        Command::Baseline { mode, run } => cmd_pipeline("baseline", mode.into(), &run).map(|_| ()),
        Command::Ablate { thresholds, run } => cmd_ablate(thresholds.as_deref(), &run),
        Command::Density { results, n, out } => cmd_density(&results, n, &out),
        Command::Subsample {
            results,
            target,
            seed,
            out,
        } => cmd_subsample(&results, target, seed, &out),
        Command::Fixtures { action } => match action {
            FixtureAction::Record { mode, run } => {
                if run.record.is_none() {
                    return Err(CliError::Config("fixtures record needs --record DIR".into()));
                }
                cmd_pipeline("fixtures record", mode.into(), &run).map(|_| ())
            }
            FixtureAction::Replay { mode, expected, run } => cmd_replay_check(mode.into(), &expected, &run),
        },
    }
}

/// Entry point used by the `vecot` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
