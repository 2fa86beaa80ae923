//! Command-line front end for the `nkdelib` binary.
//!
//! Every setting can come from a flat TOML file (`--config`) and be
//! overridden by a flag. Output files start with `#` comment lines echoing the
//! effective configuration, followed by a CSV header row.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::beliefs::BeliefStructure;
use crate::deliberation::{run_deliberation, DeliberationParams, DmEvaluator, IntegrationPolicy};
use crate::error::Error;
use crate::experiments::{
    compare_schedules_spec, default_alpha_grid, run_batch, run_comparison, sweep_alpha_spec,
    ExperimentResult, ExperimentSpec, Pairing, DEFAULT_RESAMPLES,
};
use crate::landscape::{Landscape, NeighborScheme};
use crate::metrics::summarize_run;
use crate::schedule::AlphaSchedule;
use crate::seed::{salt, split_seed};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

const DEFAULT_RUNS: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "nkdelib",
    version,
    about = "Multi-agent deliberation on NK landscapes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One deliberation run; prints a summary and optionally writes the trace.
    Run(CommonArgs),
    /// Sweep constant integration rates over one or more k values.
    SweepAlpha {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        batch: BatchArgs,
        /// Comma-separated integration rates (default 0.0,0.1,...,1.0).
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Comma-separated k values (default: --k).
        #[arg(long = "k-values", value_delimiter = ',')]
        k_values: Option<Vec<usize>>,
    },
    /// Paired comparison of two integration schedules on shared seeds.
    CompareSchedules {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        batch: BatchArgs,
        #[arg(long = "schedule-a")]
        schedule_a: Option<String>,
        #[arg(long = "schedule-b")]
        schedule_b: Option<String>,
        /// Where to write the comparison row (default: <output stem>_comparison.csv).
        #[arg(long = "comparison-output")]
        comparison_output: Option<PathBuf>,
    },
    /// Write a landscape as JSON.
    DumpLandscape {
        #[command(flatten)]
        common: CommonArgs,
        /// Dump the ground-truth landscape a `run` with this seed would use.
        #[arg(long = "run-truth")]
        run_truth: bool,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat TOML file with default settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of agents.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "t-max")]
    pub t_max: Option<usize>,
    /// Local-search radius.
    #[arg(long)]
    pub d: Option<usize>,
    /// Schedule: `0.5`, `const:0.5`, `linear:0:1` or `piecewise:1=0.2;500=0.8`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Divergence weight of agents' beliefs in [0, 1].
    #[arg(long)]
    pub w: Option<f64>,
    /// `unconditional` or `self-interested`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long = "stop-on-consensus")]
    pub stop_on_consensus: Option<bool>,
    #[arg(long = "count-initial-positions")]
    pub count_initial_positions: Option<bool>,
    /// `random` or `adjacent`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `truth` or `agent:<i>`.
    #[arg(long)]
    pub dm: Option<String>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Worker threads (default: all cores). Never affects results.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub resamples: Option<usize>,
    /// `crn` (common random numbers) or `independent`.
    #[arg(long)]
    pub pairing: Option<String>,
    /// Where to write per-condition aggregates (default: <output stem>_aggregate.csv).
    #[arg(long = "aggregate-output")]
    pub aggregate_output: Option<PathBuf>,
}

/// Settings accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub t_max: Option<usize>,
    pub d: Option<usize>,
    pub alpha: Option<TomlScalar>,
    pub w: Option<f64>,
    pub policy: Option<String>,
    pub stop_on_consensus: Option<bool>,
    pub count_initial_positions: Option<bool>,
    pub scheme: Option<String>,
    pub seed: Option<u64>,
    pub dm: Option<String>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub runs: Option<usize>,
    pub resamples: Option<usize>,
    pub pairing: Option<String>,
    pub aggregate_output: Option<PathBuf>,
    pub alphas: Option<Vec<f64>>,
    pub k_values: Option<Vec<usize>>,
    pub schedule_a: Option<TomlScalar>,
    pub schedule_b: Option<TomlScalar>,
    pub comparison_output: Option<PathBuf>,
}

/// A schedule written either as a bare number or as a string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TomlScalar {
    Number(f64),
    Text(String),
}

impl TomlScalar {
    fn into_text(self) -> String {
        match self {
            TomlScalar::Number(v) => v.to_string(),
            TomlScalar::Text(s) => s,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_)
            | Error::Dimension { .. }
            | Error::Capacity { .. }
            | Error::Format(_) => CliError::Config(e.to_string()),
            Error::Io(_) | Error::State(_) | Error::Run { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn load_file(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        CliError::Config(format!(
            "config {}: {}",
            path.display(),
            msg.lines().last().unwrap_or("parse error").trim()
        ))
    })
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, CliError> {
    s.parse::<T>().map_err(CliError::from)
}

/// Effective configuration after merging file and flags.
struct Settings {
    params: DeliberationParams,
    dm: DmEvaluator,
    output: Option<PathBuf>,
    workers: Option<usize>,
    verbose: u8,
    lines: Vec<(String, String)>,
}

impl Settings {
    fn resolve(args: &CommonArgs, file: &FileConfig) -> Result<Self, CliError> {
        let defaults = DeliberationParams::default();
        let schedule = match args
            .alpha
            .clone()
            .or(file.alpha.clone().map(TomlScalar::into_text))
        {
            Some(s) => parse::<AlphaSchedule>(&s)?,
            None => defaults.schedule.clone(),
        };
        let params = DeliberationParams {
            n: args.n.or(file.n).unwrap_or(defaults.n),
            k: args.k.or(file.k).unwrap_or(defaults.k),
            m: args.m.or(file.m).unwrap_or(defaults.m),
            t_max: args.t_max.or(file.t_max).unwrap_or(defaults.t_max),
            d: args.d.or(file.d).unwrap_or(defaults.d),
            schedule,
            divergence_weight: args.w.or(file.w).unwrap_or(defaults.divergence_weight),
            integration_policy: match args.policy.as_deref().or(file.policy.as_deref()) {
                Some(s) => parse::<IntegrationPolicy>(s)?,
                None => defaults.integration_policy,
            },
            stop_on_consensus: args
                .stop_on_consensus
                .or(file.stop_on_consensus)
                .unwrap_or(defaults.stop_on_consensus),
            count_initial_positions: args
                .count_initial_positions
                .or(file.count_initial_positions)
                .unwrap_or(defaults.count_initial_positions),
            neighbor_scheme: match args.scheme.as_deref().or(file.scheme.as_deref()) {
                Some(s) => parse::<NeighborScheme>(s)?,
                None => defaults.neighbor_scheme,
            },
            seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        };
        let dm = match args.dm.as_deref().or(file.dm.as_deref()) {
            Some(s) => parse::<DmEvaluator>(s)?,
            None => DmEvaluator::Truth,
        };
        let p = &params;
        let lines = vec![
            ("n".into(), p.n.to_string()),
            ("k".into(), p.k.to_string()),
            ("m".into(), p.m.to_string()),
            ("t_max".into(), p.t_max.to_string()),
            ("d".into(), p.d.to_string()),
            ("alpha".into(), p.schedule.to_string()),
            ("w".into(), p.divergence_weight.to_string()),
            ("policy".into(), p.integration_policy.to_string()),
            ("stop_on_consensus".into(), p.stop_on_consensus.to_string()),
            (
                "count_initial_positions".into(),
                p.count_initial_positions.to_string(),
            ),
            ("scheme".into(), p.neighbor_scheme.to_string()),
            ("dm".into(), dm.to_string()),
            ("master_seed".into(), p.seed.to_string()),
        ];
        Ok(Self {
            params,
            dm,
            output: args.output.clone().or(file.output.clone()),
            workers: args.workers.or(file.workers),
            verbose: args.verbose,
            lines,
        })
    }

    /// Removes a key that per-condition settings override.
    fn drop_key(&mut self, key: &str) {
        self.lines.retain(|(k, _)| k != key);
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    fn header(&self, command: &str) -> String {
        let mut h = format!("# nkdelib {command}\n");
        for (k, v) in &self.lines {
            h.push_str(&format!("# {k} = {v}\n"));
        }
        h
    }

    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("nkdelib: {}", msg.as_ref());
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("output");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

struct BatchSettings {
    runs: usize,
    resamples: usize,
    pairing: Pairing,
    aggregate_output: Option<PathBuf>,
}

impl BatchSettings {
    fn resolve(
        args: &BatchArgs,
        file: &FileConfig,
        settings: &mut Settings,
    ) -> Result<Self, CliError> {
        let runs = args.runs.or(file.runs).unwrap_or(DEFAULT_RUNS);
        let resamples = args
            .resamples
            .or(file.resamples)
            .unwrap_or(DEFAULT_RESAMPLES);
        let pairing = match args.pairing.as_deref().or(file.pairing.as_deref()) {
            Some(s) => parse::<Pairing>(s)?,
            None => Pairing::CommonRandomNumbers,
        };
        settings.push("runs", runs);
        settings.push("resamples", resamples);
        settings.push("pairing", pairing);
        Ok(Self {
            runs,
            resamples,
            pairing,
            aggregate_output: args
                .aggregate_output
                .clone()
                .or(file.aggregate_output.clone()),
        })
    }

    fn apply(&self, spec: &mut ExperimentSpec, dm: DmEvaluator) {
        spec.resamples = self.resamples;
        spec.pairing = self.pairing;
        spec.dm = dm;
    }
}

fn print_table(result: &ExperimentResult) {
    println!(
        "{:<24} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "condition", "runs", "mean", "sd", "ci_low", "ci_high", "dm_norm"
    );
    for c in &result.conditions {
        let s = &c.stats;
        println!(
            "{:<24} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10}",
            c.label,
            s.runs,
            s.mean,
            s.sd,
            s.ci.low,
            s.ci.high,
            s.mean_dm_value_normalized
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into())
        );
    }
}

fn write_batch_files(
    result: &ExperimentResult,
    header: &str,
    runs_path: &Path,
    aggregate_path: &Path,
) -> Result<(), CliError> {
    let mut out = create(runs_path)?;
    out.write_all(header.as_bytes())
        .map_err(|e| io_err(runs_path, e))?;
    result.write_runs_csv(&mut out)?;
    out.flush().map_err(|e| io_err(runs_path, e))?;

    let mut agg = create(aggregate_path)?;
    agg.write_all(header.as_bytes())
        .map_err(|e| io_err(aggregate_path, e))?;
    result.write_aggregate_csv(&mut agg)?;
    agg.flush().map_err(|e| io_err(aggregate_path, e))?;
    Ok(())
}

fn cmd_run(args: &CommonArgs) -> Result<(), CliError> {
    let file = load_file(args.config.as_deref())?;
    let settings = Settings::resolve(args, &file)?;
    let p = &settings.params;
    p.validate()?;
    let mut out = settings.output.as_deref().map(create).transpose()?;

    let beliefs = BeliefStructure::<f64>::generate(
        p.n,
        p.k,
        p.m,
        p.divergence_weight,
        p.neighbor_scheme,
        split_seed(p.seed, salt::BELIEFS, 0),
    )?;
    let started = Instant::now();
    let trace = run_deliberation(p, &beliefs)?;
    let summary = summarize_run(&trace, beliefs.truth(), |x| {
        settings.dm.evaluate(&beliefs, x)
    })?;
    settings.log(format!("run finished in {:.3?}", started.elapsed()));

    if let (Some(out), Some(path)) = (out.as_mut(), settings.output.as_deref()) {
        out.write_all(settings.header("run").as_bytes())
            .map_err(|e| io_err(path, e))?;
        trace.write_csv(&beliefs, &mut *out)?;
        out.flush().map_err(|e| io_err(path, e))?;
    }

    println!("distinct_solutions={}", summary.distinct_solutions);
    println!("dm_choice={}", summary.dm_choice);
    println!("dm_value={}", summary.dm_value);
    println!(
        "dm_value_normalized={}",
        summary
            .dm_value_normalized
            .map(|v| v.to_string())
            .unwrap_or_default()
    );
    println!(
        "consensus_round={}",
        summary
            .consensus_round
            .map(|v| v.to_string())
            .unwrap_or_default()
    );
    println!("rounds_executed={}", summary.rounds_executed);
    println!("terminated_by={:?}", trace.terminated_by());
    Ok(())
}

fn cmd_sweep(
    common: &CommonArgs,
    batch: &BatchArgs,
    alphas: Option<&Vec<f64>>,
    k_values: Option<&Vec<usize>>,
) -> Result<(), CliError> {
    let file = load_file(common.config.as_deref())?;
    let mut settings = Settings::resolve(common, &file)?;
    let batch = BatchSettings::resolve(batch, &file, &mut settings)?;
    let alphas = alphas
        .cloned()
        .or(file.alphas.clone())
        .unwrap_or_else(default_alpha_grid);
    let k_values = k_values
        .cloned()
        .or(file.k_values.clone())
        .unwrap_or_else(|| vec![settings.params.k]);
    settings.drop_key("alpha");
    settings.drop_key("k");
    settings.push("alphas", join(&alphas));
    settings.push("k_values", join(&k_values));

    let mut spec = sweep_alpha_spec(
        &settings.params,
        &alphas,
        &k_values,
        settings.params.divergence_weight,
        batch.runs,
        settings.params.seed,
    )?;
    batch.apply(&mut spec, settings.dm);
    spec.validate()?;

    let runs_path = settings
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("sweep_alpha.csv"));
    let aggregate_path = batch
        .aggregate_output
        .clone()
        .unwrap_or_else(|| sibling(&runs_path, "aggregate"));
    // Fail on unwritable paths before spending time on the batch.
    create(&runs_path)?;
    create(&aggregate_path)?;

    let started = Instant::now();
    let result = with_pool(settings.workers, || run_batch(&spec))??;
    settings.log(format!(
        "{} runs finished in {:.3?}",
        spec.conditions.len() * spec.runs_per_condition,
        started.elapsed()
    ));
    write_batch_files(
        &result,
        &settings.header("sweep-alpha"),
        &runs_path,
        &aggregate_path,
    )?;
    print_table(&result);
    Ok(())
}

fn cmd_compare(
    common: &CommonArgs,
    batch: &BatchArgs,
    schedule_a: Option<&String>,
    schedule_b: Option<&String>,
    comparison_output: Option<&PathBuf>,
) -> Result<(), CliError> {
    let file = load_file(common.config.as_deref())?;
    let mut settings = Settings::resolve(common, &file)?;
    let batch = BatchSettings::resolve(batch, &file, &mut settings)?;
    let a = schedule_a
        .cloned()
        .or(file.schedule_a.clone().map(TomlScalar::into_text))
        .unwrap_or_else(|| "linear:0:1".into());
    let b = schedule_b
        .cloned()
        .or(file.schedule_b.clone().map(TomlScalar::into_text))
        .unwrap_or_else(|| "const:0.5".into());
    let a = parse::<AlphaSchedule>(&a)?;
    let b = parse::<AlphaSchedule>(&b)?;
    settings.drop_key("alpha");
    settings.push("schedule_a", &a);
    settings.push("schedule_b", &b);

    let mut spec =
        compare_schedules_spec(&settings.params, &a, &b, batch.runs, settings.params.seed)?;
    batch.apply(&mut spec, settings.dm);
    spec.validate()?;

    let runs_path = settings
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("compare_schedules.csv"));
    let aggregate_path = batch
        .aggregate_output
        .clone()
        .unwrap_or_else(|| sibling(&runs_path, "aggregate"));
    let comparison_path = comparison_output
        .cloned()
        .or(file.comparison_output.clone())
        .unwrap_or_else(|| sibling(&runs_path, "comparison"));
    for path in [&runs_path, &aggregate_path, &comparison_path] {
        create(path)?;
    }

    let started = Instant::now();
    let cmp = with_pool(settings.workers, || run_comparison(&spec))??;
    settings.log(format!("comparison finished in {:.3?}", started.elapsed()));
    let header = settings.header("compare-schedules");
    write_batch_files(&cmp.result, &header, &runs_path, &aggregate_path)?;
    let mut out = create(&comparison_path)?;
    out.write_all(header.as_bytes())
        .map_err(|e| io_err(&comparison_path, e))?;
    cmp.comparison.write_csv(&mut out)?;
    out.flush().map_err(|e| io_err(&comparison_path, e))?;

    print_table(&cmp.result);
    let c = &cmp.comparison;
    println!(
        "paired difference ({} - {}) = {} over {} runs, one-sided p = {}",
        c.label_a, c.label_b, c.mean_difference, c.runs, c.p_value
    );
    Ok(())
}

fn cmd_dump(args: &CommonArgs, run_truth: bool) -> Result<(), CliError> {
    let file = load_file(args.config.as_deref())?;
    let mut settings = Settings::resolve(args, &file)?;
    let p = &settings.params;
    let seed = if run_truth {
        split_seed(split_seed(p.seed, salt::BELIEFS, 0), salt::TRUTH, 0)
    } else {
        p.seed
    };
    let landscape = Landscape::<f64>::generate(p.n, p.k, p.neighbor_scheme, seed)?;
    settings.push("run_truth", run_truth);
    match settings.output.as_deref() {
        Some(path) => {
            let mut out = create(path)?;
            landscape.dump(&mut out)?;
            writeln!(out).map_err(|e| io_err(path, e))?;
            out.flush().map_err(|e| io_err(path, e))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            landscape.dump(&mut lock)?;
            writeln!(lock).map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    Ok(())
}

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SweepAlpha {
            common,
            batch,
            alphas,
            k_values,
        } => cmd_sweep(common, batch, alphas.as_ref(), k_values.as_ref()),
        Command::CompareSchedules {
            common,
            batch,
            schedule_a,
            schedule_b,
            comparison_output,
        } => cmd_compare(
            common,
            batch,
            schedule_a.as_ref(),
            schedule_b.as_ref(),
            comparison_output.as_ref(),
        ),
        Command::DumpLandscape { common, run_truth } => cmd_dump(common, *run_truth),
    }
}

/// Parses `argv` and runs the selected subcommand, returning the exit status.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("nkdelib: {}", first.trim_start_matches("error: "));
            return EXIT_CONFIG;
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("nkdelib: {}", e.message());
            e.code()
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}
