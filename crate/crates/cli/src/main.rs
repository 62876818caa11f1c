//! `vbench`: corpus preparation, reference validation, evaluation sweeps,
//! and score reporting behind one binary.
//!
//! Exit codes: 0 success, 2 configuration or preflight error, 3 coverage
//! error (incomplete store for a requested report), 4 tool error.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ProviderKind, ProviderProfile, RunConfig};
use vbench_core::corpus::{
    deduplicate, extract_verilog_blocks, scan_sources, sliding_windows,
    export_training_set, CorpusOrigin, DedupConfig, TrainingExample,
};
use vbench_core::generation::{
    CompletionService, HttpProvider, HttpProviderConfig, MockProvider, ProviderClient,
    RatePolicy, SystemPromptMode, Temperature,
};
use vbench_core::harness::{
    run_sweep, Harness, RecordStore, Status, SweepConfig, SweepError, SweepSummary,
};
use vbench_core::problems::{load_problem_set, validate_references, Detail, ProblemSet};
use vbench_core::scoring::{emit_tables, ScoreError, TableLayout};

const EXIT_CONFIG: u8 = 2;
const EXIT_COVERAGE: u8 = 3;
const EXIT_TOOL: u8 = 4;

#[derive(Parser)]
#[command(name = "vbench", version, about = "Batch evaluation of generated Verilog")]
struct Cli {
    /// Run configuration file (TOML). Built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a training corpus: scan, dedup, extract, window, export.
    Corpus(CorpusArgs),
    /// Evaluate every reference solution against its own testbench.
    Validate(ValidateArgs),
    /// Run a generation + evaluation sweep, resuming any existing store.
    Eval(EvalArgs),
    /// Score a record store and emit the report tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Root directory of the raw sources.
    #[arg(long)]
    root: PathBuf,
    /// What the root contains; book text goes through block extraction.
    #[arg(long, value_enum, default_value_t = OriginArg::Repo)]
    origin: OriginArg,
    /// Output directory for training.jsonl and manifest.json.
    #[arg(long, default_value = "corpus_out")]
    out: PathBuf,
    /// Window length in characters.
    #[arg(long, default_value_t = 1024)]
    window: usize,
    /// Window start spacing in characters.
    #[arg(long, default_value_t = 512)]
    stride: usize,
    /// Near-duplicate similarity threshold.
    #[arg(long, default_value_t = 0.85)]
    threshold: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OriginArg {
    Repo,
    Book,
}

impl OriginArg {
    fn origin(self) -> CorpusOrigin {
        match self {
            OriginArg::Repo => CorpusOrigin::RepoTree,
            OriginArg::Book => CorpusOrigin::BookText,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// Problem directory (overrides the configured path).
    #[arg(long)]
    problems: Option<PathBuf>,
    /// Per-candidate simulation timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Problem directory (overrides the configured path).
    #[arg(long)]
    problems: Option<PathBuf>,
    /// Provider profile id (the configured default when absent).
    #[arg(long)]
    provider: Option<String>,
    /// Temperatures to sweep.
    #[arg(long, value_delimiter = ',')]
    temps: Option<Vec<f64>>,
    /// Completions per (problem, detail, temperature) cell.
    #[arg(long)]
    n: Option<usize>,
    /// Prompt detail tiers to sweep.
    #[arg(long, value_delimiter = ',')]
    details: Option<Vec<Detail>>,
    /// Record store path (overrides the configured path).
    #[arg(long)]
    store: Option<PathBuf>,
    /// Concurrent compile+simulate workers.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Per-candidate simulation timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Token budget per completion.
    #[arg(long)]
    max_tokens: Option<u32>,
    /// System prompt attached on chat-style providers.
    #[arg(long, value_enum, default_value_t = SystemPromptArg::None)]
    system_prompt: SystemPromptArg,
    /// Keep the scratch directory of every failing candidate.
    #[arg(long)]
    debug_keep_scratch: bool,
    /// Restrict the sweep to these problem ids (repeatable; all when absent).
    #[arg(long = "problem")]
    problem: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemPromptArg {
    None,
    Unguided,
    Guided,
}

impl SystemPromptArg {
    fn mode(self) -> SystemPromptMode {
        match self {
            SystemPromptArg::None => SystemPromptMode::None,
            SystemPromptArg::Unguided => SystemPromptMode::UnguidedV0,
            SystemPromptArg::Guided => SystemPromptMode::GuidedV1,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Record store path (overrides the configured path).
    #[arg(long)]
    store: Option<PathBuf>,
    /// Problem directory (overrides the configured path).
    #[arg(long)]
    problems: Option<PathBuf>,
    /// Which table(s) to emit.
    #[arg(long, value_enum, default_value_t = PredicateArg::Both)]
    predicate: PredicateArg,
    /// Completions per cell to score (largest stored index + 1 when absent).
    #[arg(long)]
    n: Option<usize>,
    /// Output directory (overrides the configured path).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PredicateArg {
    Compiles,
    Passes,
    Both,
}

impl PredicateArg {
    fn layouts(self) -> Vec<TableLayout> {
        match self {
            PredicateArg::Compiles => vec![TableLayout::CompileTable],
            PredicateArg::Passes => vec![TableLayout::FunctionalTable],
            PredicateArg::Both => {
                vec![TableLayout::CompileTable, TableLayout::FunctionalTable]
            }
        }
    }
}

/// An error already mapped to its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait WithCode<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> WithCode<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match load_config(cli.config.as_deref()) {
        Err(failure) => Err(failure),
        Ok(config) => match cli.command {
            Command::Corpus(args) => cmd_corpus(&args),
            Command::Validate(args) => cmd_validate(&config, &args),
            Command::Eval(args) => cmd_eval(&config, &args),
            Command::Report(args) => cmd_report(&config, &args),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", render_error(&failure.error));
            ExitCode::from(failure.code)
        }
    }
}

/// The full cause chain, skipping causes a layer already printed itself.
fn render_error(error: &anyhow::Error) -> String {
    let mut text = error.to_string();
    for cause in error.chain().skip(1) {
        let cause = cause.to_string();
        if !text.contains(&cause) {
            text.push_str(": ");
            text.push_str(&cause);
        }
    }
    text
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    match path {
        Some(path) => RunConfig::load(path).code(EXIT_CONFIG),
        None => Ok(RunConfig::default()),
    }
}

fn cmd_corpus(args: &CorpusArgs) -> Result<(), Failure> {
    let origin = args.origin.origin();
    let report = scan_sources(&args.root, origin).code(EXIT_TOOL)?;
    let stats = report.stats;
    println!(
        "scanned={} filtered_extension={} filtered_no_module={} filtered_large={} unreadable={}",
        stats.scanned,
        stats.filtered_extension,
        stats.filtered_no_module,
        stats.filtered_large,
        stats.unreadable,
    );

    let dedup_config = DedupConfig { threshold: args.threshold, ..DedupConfig::default() };
    let outcome = deduplicate(report.files, &dedup_config).code(EXIT_TOOL)?;
    println!("kept={} dropped={}", outcome.kept.len(), outcome.dropped.len());

    let mut examples: Vec<TrainingExample> = Vec::new();
    let mut blocks = 0usize;
    for file in &outcome.kept {
        match origin {
            CorpusOrigin::RepoTree => {
                let windows = sliding_windows(&file.id, &file.text, args.window, args.stride)
                    .code(EXIT_CONFIG)?;
                examples.extend(windows);
            }
            CorpusOrigin::BookText => {
                for (index, block) in extract_verilog_blocks(&file.text).iter().enumerate() {
                    blocks += 1;
                    let source_id = format!("{}#b{index}", file.id);
                    let windows =
                        sliding_windows(&source_id, &block.text, args.window, args.stride)
                            .code(EXIT_CONFIG)?;
                    examples.extend(windows);
                }
            }
        }
    }
    if origin == CorpusOrigin::BookText {
        println!("blocks={blocks}");
    }
    println!("examples={}", examples.len());

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .code(EXIT_TOOL)?;
    let train_path = args.out.join("training.jsonl");
    export_training_set(&examples, &train_path).code(EXIT_TOOL)?;

    let manifest_path = args.out.join("manifest.json");
    let manifest = serde_json::json!({
        "stats": stats,
        "kept": outcome.kept,
        "dropped": outcome.dropped,
        "skipped": report.skipped,
        "replacements": report.replacements,
    });
    let mut manifest_text = serde_json::to_string_pretty(&manifest)
        .context("serializing manifest")
        .code(EXIT_TOOL)?;
    manifest_text.push('\n');
    std::fs::write(&manifest_path, manifest_text)
        .with_context(|| format!("writing {}", manifest_path.display()))
        .code(EXIT_TOOL)?;

    println!("wrote {}", train_path.display());
    println!("wrote {}", manifest_path.display());
    Ok(())
}

fn load_problems(config: &RunConfig, flag: Option<&Path>) -> Result<ProblemSet, Failure> {
    let dir = flag.unwrap_or(&config.paths.problems);
    load_problem_set(dir)
        .with_context(|| format!("loading problems from {}", dir.display()))
        .code(EXIT_CONFIG)
}

fn build_harness(config: &RunConfig, timeout_flag: Option<f64>) -> Result<Harness, Failure> {
    let toolchain = config.toolchain.build().code(EXIT_CONFIG)?;
    let sim_timeout = match timeout_flag {
        Some(seconds) => Duration::from_secs_f64(seconds),
        None => config.sweep.sim_timeout(),
    };
    Ok(Harness::new(toolchain)
        .with_sim_timeout(sim_timeout)
        .with_compile_timeout(config.sweep.compile_timeout()))
}

fn cmd_validate(config: &RunConfig, args: &ValidateArgs) -> Result<(), Failure> {
    let set = load_problems(config, args.problems.as_deref())?;
    let harness = build_harness(config, args.timeout)?;
    harness.preflight().code(EXIT_CONFIG)?;

    let report = validate_references(&set, &harness).code(EXIT_TOOL)?;
    for row in &report.rows {
        let mismatches = match row.mismatches {
            Some(k) => format!("mismatches={k}"),
            None => String::new(),
        };
        println!("{:<12} {:<16} {}", row.problem_id, row.status, mismatches);
    }
    let passing = report.rows.iter().filter(|r| r.status == Status::Success).count();
    println!("{passing}/{} references pass", report.rows.len());
    if report.all_success() {
        Ok(())
    } else {
        Err(anyhow!("{} reference(s) failed validation", report.failures().len()))
            .code(EXIT_TOOL)
    }
}

fn build_service(profile: &ProviderProfile) -> Result<Box<dyn CompletionService>, Failure> {
    match profile.kind {
        ProviderKind::Mock => {
            let fixture = profile.fixture.as_ref().ok_or_else(|| Failure {
                code: EXIT_CONFIG,
                error: anyhow!("mock provider {:?} has no fixture file", profile.id),
            })?;
            let mut provider =
                MockProvider::from_fixture_file(fixture).code(EXIT_CONFIG)?.with_id(&profile.id);
            if let Some(cap) = profile.max_n_per_call {
                provider = provider.with_max_n_per_call(cap);
            }
            Ok(Box::new(ProviderClient::new(provider)))
        }
        ProviderKind::HttpCompletion | ProviderKind::HttpChat => {
            let endpoint = profile.endpoint.as_deref().unwrap_or_default();
            let api_key_env = profile.api_key_env.as_deref().unwrap_or_default();
            let model = profile.model.as_deref().unwrap_or_default();
            let mut http = match profile.kind {
                ProviderKind::HttpChat => {
                    HttpProviderConfig::chat(&profile.id, endpoint, api_key_env, model)
                }
                _ => HttpProviderConfig::completion(&profile.id, endpoint, api_key_env, model),
            };
            if let Some(cap) = profile.max_n_per_call {
                http.max_n_per_call = cap;
            }
            if let Some(cap) = profile.max_tokens_cap {
                http.max_tokens_cap = cap;
            }
            http.requests_per_second = profile.requests_per_second;
            let pacing = http.requests_per_second;
            let provider = HttpProvider::from_env(http).code(EXIT_CONFIG)?;
            let mut client = ProviderClient::new(provider);
            if let Some(per_second) = pacing {
                client = client
                    .with_rate_limit(RatePolicy { per_second, burst: per_second.max(1.0) });
            }
            Ok(Box::new(client))
        }
    }
}

fn merge_summary(total: &mut SweepSummary, part: SweepSummary) {
    total.cells += part.cells;
    total.evaluated += part.evaluated;
    total.skipped += part.skipped;
    for (status, count) in part.by_status {
        *total.by_status.entry(status).or_insert(0) += count;
    }
    total.store_len = part.store_len;
}

fn cmd_eval(config: &RunConfig, args: &EvalArgs) -> Result<(), Failure> {
    let profile = config.provider(args.provider.as_deref()).code(EXIT_CONFIG)?;
    let set = load_problems(config, args.problems.as_deref())?;

    let problem_ids = if args.problem.is_empty() {
        set.ids()
    } else {
        for id in &args.problem {
            if set.get(id).is_none() {
                return Err(anyhow!("unknown problem id {id:?}")).code(EXIT_CONFIG);
            }
        }
        args.problem.clone()
    };

    let details = args.details.clone().unwrap_or_else(|| config.sweep.details.clone());
    let temperatures: Vec<Temperature> = match &args.temps {
        Some(temps) => temps.iter().map(|&t| Temperature(t)).collect(),
        None => config.sweep.temperatures(),
    };
    let n = args.n.unwrap_or(config.sweep.n);
    let parallelism = args.parallelism.unwrap_or(config.sweep.parallelism);
    let max_tokens = args.max_tokens.unwrap_or(config.sweep.max_tokens);

    let mut harness = build_harness(config, args.timeout)?;
    if args.debug_keep_scratch {
        harness = harness.with_keep_scratch_on_failure(true);
    }
    harness.preflight().code(EXIT_CONFIG)?;
    let service = build_service(profile)?;

    let store_path = args.store.clone().unwrap_or_else(|| config.paths.store.clone());
    let mut store = RecordStore::open(&store_path).code(EXIT_CONFIG)?;

    eprintln!(
        "provider={} problems={} details={} temps={} n={n} parallelism={parallelism}",
        profile.id,
        problem_ids.len(),
        details.len(),
        temperatures.len(),
    );

    let mut total = SweepSummary {
        cells: 0,
        evaluated: 0,
        skipped: 0,
        by_status: BTreeMap::new(),
        store_len: store.len(),
    };
    // One sweep call per problem so progress is visible between them; the
    // shared store makes the split invisible to resumption.
    for (index, problem_id) in problem_ids.iter().enumerate() {
        let sweep = SweepConfig {
            problem_ids: vec![problem_id.clone()],
            details: details.clone(),
            temperatures: temperatures.clone(),
            n,
            expected_provider: Some(profile.id.clone()),
            system_prompt_mode: args.system_prompt.mode(),
            max_tokens,
            parallelism,
        };
        let part = run_sweep(&set, service.as_ref(), &harness, &mut store, &sweep)
            .map_err(|error| {
                let code = match &error {
                    SweepError::Config(_) | SweepError::UnknownProblem { .. } => EXIT_CONFIG,
                    _ => EXIT_TOOL,
                };
                Failure { code, error: error.into() }
            })?;
        eprintln!(
            "[{}/{}] {problem_id} evaluated={} skipped={}",
            index + 1,
            problem_ids.len(),
            part.evaluated,
            part.skipped,
        );
        merge_summary(&mut total, part);
    }

    println!(
        "cells={} evaluated={} skipped={} records={}",
        total.cells, total.evaluated, total.skipped, total.store_len,
    );
    let tallies: Vec<String> = Status::ALL
        .iter()
        .map(|s| format!("{s}={}", total.by_status.get(s).copied().unwrap_or(0)))
        .collect();
    println!("status: {}", tallies.join(" "));
    println!("store={}", store_path.display());
    Ok(())
}

fn cmd_report(config: &RunConfig, args: &ReportArgs) -> Result<(), Failure> {
    let store_path = args.store.clone().unwrap_or_else(|| config.paths.store.clone());
    let records = RecordStore::load_records(&store_path).code(EXIT_CONFIG)?;
    let set = load_problems(config, args.problems.as_deref())?;

    let n = match args.n {
        Some(n) => n,
        None => records
            .iter()
            .map(|r| r.completion_index + 1)
            .max()
            .ok_or_else(|| Failure {
                code: EXIT_COVERAGE,
                error: ScoreError::EmptyStore.into(),
            })?,
    };

    let out_dir = args.out.clone().unwrap_or_else(|| config.paths.report_out.clone());
    for layout in args.predicate.layouts() {
        let files = emit_tables(&set, &records, layout, n, &out_dir).map_err(|error| {
            let code = match &error {
                ScoreError::Io { .. } => EXIT_TOOL,
                _ => EXIT_COVERAGE,
            };
            Failure { code, error: error.into() }
        })?;
        let text = std::fs::read_to_string(&files.text)
            .with_context(|| format!("reading {}", files.text.display()))
            .code(EXIT_TOOL)?;
        print!("{text}");
        println!("wrote {}", files.text.display());
        println!("wrote {}", files.csv.display());
        println!();
    }
    Ok(())
}
