//! `fastslow` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 when a
//! run fails (unreadable data, unwritable report, ...).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use fastslow::dataset::{self, Dataset};
use fastslow::estimator::{CrossValidator, EstimatorKind, EstimatorSpec, LrSolver, ScoreCache};
use fastslow::experiments::report::{round_significant, Report, SCHEMA_VERSION};
use fastslow::experiments::{
    alpha_sweep, baseline_no_selection, default_mutation_grid, emit_report, mutation_sweep, render_report, Preset,
    ReportFormat, RunReport, SweepAxis, SweepSummary,
};
use fastslow::fast_slow::{run_fast_slow, FastSlowConfig};
use fastslow::ga::{run_ga, GaConfig, Scorer};
use fastslow::Execution;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "fastslow",
    version,
    about = "Genetic feature selection with fast and slow mutation islands"
)]
#[command(args_override_self = true)]
struct Cli {
    /// Key-value file (`key = value` per line) supplying default flags;
    /// flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic toy dataset as CSV.
    GenData(GenDataArgs),
    /// Run a single genetic algorithm.
    RunGa(RunGaArgs),
    /// Run the fast/slow two-island scheme.
    #[command(name = "run-fastslow")]
    RunFastSlow(RunFastSlowArgs),
    /// Single-GA ensembles over a grid of mutation rates.
    SweepMu(SweepMuArgs),
    /// Fast/slow ensembles over a grid of alpha values.
    SweepAlpha(SweepAlphaArgs),
    /// Cross-validated score with every feature selected.
    Baseline(BaselineArgs),
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 50)]
    features: usize,
    /// Number of leading columns that determine the label.
    #[arg(long, default_value_t = 10)]
    significant: usize,
    /// Label is 1 when the mean of the significant columns exceeds this.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Name of the label column.
    #[arg(long, default_value = dataset::DEFAULT_TARGET)]
    target: String,
    #[arg(short, long, value_name = "PATH")]
    output: PathBuf,
}

/// Where the data comes from: a CSV file or the toy generator.
#[derive(Args, Debug)]
struct DataArgs {
    /// CSV file to load; without it a toy dataset is generated.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Label column (name, or zero-based index with --no-header).
    #[arg(long, default_value = dataset::DEFAULT_TARGET, requires = "data")]
    target: String,
    /// The CSV has no header row.
    #[arg(long, requires = "data")]
    no_header: bool,
    /// Problem size preset: quick (1000 samples, 15 runs) or full (10000
    /// samples, 50 runs). Explicit flags override it.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Toy samples [preset: quick 1000, full 10000].
    #[arg(long, default_value_t = 10_000, conflicts_with = "data")]
    samples: usize,
    #[arg(long, default_value_t = 50, conflicts_with = "data")]
    features: usize,
    #[arg(long, default_value_t = 10, conflicts_with = "data")]
    significant: usize,
    #[arg(long, default_value_t = 0.5, conflicts_with = "data")]
    threshold: f64,
    /// Seed of the toy generator.
    #[arg(long, default_value_t = 1, conflicts_with = "data")]
    data_seed: u64,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Keep class proportions in every fold.
    #[arg(long)]
    stratified: bool,
    /// Seed of the fold assignment.
    #[arg(long, default_value_t = 0)]
    fold_seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorChoice::Logistic)]
    estimator: EstimatorChoice,
    #[arg(long, value_enum, default_value_t = SolverChoice::Newton)]
    lr_solver: SolverChoice,
    /// Gradient-descent step size.
    #[arg(long, default_value_t = 0.1)]
    lr_rate: f64,
    /// Gradient-descent epochs.
    #[arg(long, default_value_t = 300)]
    lr_epochs: usize,
    /// Newton iteration cap.
    #[arg(long, default_value_t = 50)]
    lr_newton_iter: usize,
    /// L2 penalty on the weights.
    #[arg(long, default_value_t = 1e-4)]
    lr_l2: f64,
    #[arg(long, default_value_t = 50)]
    rf_trees: usize,
    #[arg(long, default_value_t = 8)]
    rf_depth: usize,
    #[arg(long, default_value_t = 2)]
    rf_min_leaf: usize,
    /// Fraction of features tried per split [default: sqrt of the count].
    #[arg(long)]
    rf_feature_fraction: Option<f64>,
    /// Grow every tree on the full training fold.
    #[arg(long)]
    rf_no_bootstrap: bool,
    /// Seed for randomised estimators.
    #[arg(long, default_value_t = 0)]
    estimator_seed: u64,
    /// Evaluate, run islands and run ensembles sequentially.
    #[arg(long)]
    serial: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report destination; without it the report goes to stdout and the
    /// summary to stderr.
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Report format [default: csv for a .csv path, json otherwise].
    #[arg(long, value_enum)]
    format: Option<FormatChoice>,
    /// Record wall-clock duration in run reports.
    #[arg(long)]
    timing: bool,
}

/// Settings shared by both algorithms.
#[derive(Args, Debug)]
struct SearchArgs {
    /// Population size N [preset: 20].
    #[arg(long, default_value_t = 20)]
    pop: usize,
    /// Weight of the score against the selected-feature count, in [0, 1].
    #[arg(long, default_value_t = 0.9, value_parser = unit_interval)]
    alpha: f64,
    /// Probability that a bit of an initial chromosome is set, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    init_density: f64,
    /// Redraw the second parent until it differs from the first.
    #[arg(long)]
    distinct_parents: bool,
    /// Run seed (base seed for sweeps: run i uses seed + i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct IslandArgs {
    /// Mutation rate of the fast island.
    #[arg(long, default_value_t = 1.0, value_parser = unit_interval)]
    mu_fast: f64,
    /// Mutation rate of the slow island.
    #[arg(long, default_value_t = 0.1, value_parser = unit_interval)]
    mu_slow: f64,
    /// Generations per island per round [preset: 5].
    #[arg(long, default_value_t = 5)]
    inner: usize,
    /// Outer rounds (evolve both islands, merge) [preset: 4].
    #[arg(long, default_value_t = 4)]
    rounds: usize,
}

#[derive(Args, Debug)]
struct RunGaArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Per-bit mutation rate, in [0, 1].
    #[arg(long, default_value_t = 0.1, value_parser = unit_interval)]
    mu: f64,
    /// Generations G [preset: 20].
    #[arg(long, default_value_t = 20)]
    generations: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct RunFastSlowArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    islands: IslandArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepMuArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Comma-separated mutation rates [default: 0.01, 0.03, ..., 0.99].
    #[arg(long, value_delimiter = ',', value_parser = unit_interval)]
    values: Vec<f64>,
    /// Runs per value [preset: quick 15, full 50].
    #[arg(long, default_value_t = 50)]
    runs: usize,
    /// Generations G [preset: 20].
    #[arg(long, default_value_t = 20)]
    generations: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepAlphaArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    islands: IslandArgs,
    /// Comma-separated alpha values.
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, default_value = "0.5,0.7,0.9,1")]
    values: Vec<f64>,
    /// Runs per value [preset: quick 15, full 50].
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EstimatorChoice {
    Logistic,
    Forest,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverChoice {
    Newton,
    Gd,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatChoice {
    Json,
    Csv,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside the valid range [0, 1]"))
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

/// A problem with validation of user input, reported with exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Maps library errors: configuration problems are usage errors.
fn lib(e: fastslow::Error) -> anyhow::Error {
    match e {
        fastslow::Error::Config(msg) => UsageError(msg).into(),
        other => other.into(),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Reads `key = value` lines into flags. `#` starts a comment; `true`
/// turns a switch on and `false` leaves it off.
fn config_flags(path: &Path) -> anyhow::Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut flags = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("{}:{}: expected `key = value`", path.display(), n + 1)));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key == "config" {
            return Err(usage(format!(
                "{}:{}: config files cannot include other config files",
                path.display(),
                n + 1
            )));
        }
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    Ok(flags)
}

/// Inserts config-file flags right after the subcommand, so that later
/// command-line occurrences override them.
fn merge_config(argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut path = None;
    for (i, arg) in argv.iter().enumerate() {
        if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if arg == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let subcommands = [
        "gen-data",
        "run-ga",
        "run-fastslow",
        "sweep-mu",
        "sweep-alpha",
        "baseline",
    ];
    let Some(at) = argv.iter().position(|a| subcommands.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let mut merged = argv[..=at].to_vec();
    merged.extend(config_flags(&path)?);
    merged.extend_from_slice(&argv[at + 1..]);
    Ok(merged)
}

/// Applies a preset to flags the user did not set.
struct Resolver<'m> {
    matches: &'m ArgMatches,
    preset: Option<Preset>,
}

impl Resolver<'_> {
    fn new(matches: &ArgMatches, preset: Option<Preset>) -> Resolver<'_> {
        let (_, sub) = matches.subcommand().expect("subcommand is required");
        Resolver { matches: sub, preset }
    }

    fn pick(&self, id: &str, given: usize, from_preset: fn(Preset) -> usize) -> usize {
        match (self.matches.value_source(id), self.preset) {
            (Some(ValueSource::CommandLine), _) | (_, None) => given,
            (_, Some(p)) => from_preset(p),
        }
    }
}

fn load_data(args: &DataArgs, resolve: &Resolver) -> anyhow::Result<Dataset> {
    if let Some(path) = &args.data {
        return dataset::load_csv(path, &args.target, !args.no_header).map_err(lib);
    }
    let samples = resolve.pick("samples", args.samples, Preset::n_samples);
    dataset::generate_toy(samples, args.features, args.significant, args.threshold, args.data_seed).map_err(lib)
}

fn estimator_spec(args: &EvalArgs) -> anyhow::Result<EstimatorSpec> {
    let spec = EstimatorSpec {
        kind: match args.estimator {
            EstimatorChoice::Logistic => EstimatorKind::LogisticRegression,
            EstimatorChoice::Forest => EstimatorKind::RandomForest,
        },
        lr_solver: match args.lr_solver {
            SolverChoice::Newton => LrSolver::Newton,
            SolverChoice::Gd => LrSolver::GradientDescent,
        },
        lr_learning_rate: args.lr_rate,
        lr_epochs: args.lr_epochs,
        lr_max_newton_iter: args.lr_newton_iter,
        lr_l2: args.lr_l2,
        rf_n_trees: args.rf_trees,
        rf_max_depth: args.rf_depth,
        rf_min_leaf: args.rf_min_leaf,
        rf_feature_subsample: args.rf_feature_fraction,
        rf_bootstrap: !args.rf_no_bootstrap,
        seed: args.estimator_seed,
    };
    spec.validate().map_err(lib)?;
    if args.folds < 2 {
        return Err(usage(format!("folds must be at least 2, got {}", args.folds)));
    }
    Ok(spec)
}

fn validator(data: &Dataset, args: &EvalArgs, spec: &EstimatorSpec) -> anyhow::Result<CrossValidator> {
    let folds = if args.stratified {
        dataset::stratified_kfold_split(data.target(), args.folds, args.fold_seed)
    } else {
        dataset::kfold_split(data.n_samples(), args.folds, args.fold_seed)
    }
    .map_err(lib)?;
    CrossValidator::new(data, spec, &folds).map_err(lib)
}

fn execution(args: &EvalArgs) -> Execution {
    if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    }
}

fn ga_config(search: &SearchArgs, pop: usize, mu: f64, generations: usize) -> GaConfig {
    GaConfig {
        population_size: pop,
        mutation_rate: mu,
        alpha: search.alpha,
        generations,
        init_density: search.init_density,
        seed: search.seed,
        distinct_parents: search.distinct_parents,
    }
}

fn fast_slow_config(search: &SearchArgs, islands: &IslandArgs, resolve: &Resolver) -> FastSlowConfig {
    let pop = resolve.pick("pop", search.pop, Preset::population_size);
    FastSlowConfig {
        base: ga_config(search, pop, islands.mu_slow, 0),
        mu_fast: islands.mu_fast,
        mu_slow: islands.mu_slow,
        inner_generations: resolve.pick("inner", islands.inner, Preset::inner_generations),
        outer_rounds: resolve.pick("rounds", islands.rounds, Preset::outer_rounds),
    }
}

fn format_for(out: &OutputArgs) -> ReportFormat {
    match out.format {
        Some(FormatChoice::Json) => ReportFormat::Json,
        Some(FormatChoice::Csv) => ReportFormat::Csv,
        None => match &out.output {
            Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => ReportFormat::Csv,
            _ => ReportFormat::Json,
        },
    }
}

/// Writes the report and prints the summary line.
fn finish<R: Report>(report: &R, out: &OutputArgs, summary: &str) -> anyhow::Result<()> {
    let format = format_for(out);
    match &out.output {
        Some(path) => {
            emit_report(report, format, path)?;
            println!("{summary}");
            log::info!("report written to {}", path.display());
        }
        None => {
            print!("{}", render_report(report, format)?);
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn finish_run(mut report: RunReport, out: &OutputArgs, started: Instant) -> anyhow::Result<()> {
    report.duration_secs = out.timing.then(|| started.elapsed().as_secs_f64());
    let summary = report.summary_line();
    finish(&report, out, &summary)
}

fn sweep_summary_line(summary: &SweepSummary, names: &[String]) -> String {
    let axis = match summary.axis {
        SweepAxis::MutationRate => "mu",
        SweepAxis::Alpha => "alpha",
    };
    let Some(best) = summary
        .points
        .iter()
        .max_by(|a, b| a.mean_score.total_cmp(&b.mean_score))
    else {
        return "empty sweep".into();
    };
    let run = best
        .runs
        .iter()
        .max_by(|a, b| a.fitness.total_cmp(&b.fitness).then(b.seed.cmp(&a.seed)))
        .expect("points hold at least one run");
    let features: Vec<&str> = run.mask.selected().into_iter().map(|j| names[j].as_str()).collect();
    format!(
        "best mean score {:.4} at {axis}={} (mean {:.1} features); its best run (seed {}) scored {:.4} with {} feature(s): {}",
        best.mean_score,
        best.value,
        best.mean_n_selected,
        run.seed,
        run.score,
        run.n_selected,
        features.join(", ")
    )
}

#[derive(Serialize)]
struct BaselineReport {
    schema_version: u32,
    n_samples: usize,
    n_features: usize,
    folds: usize,
    estimator: EstimatorSpec,
    score: f64,
}

impl Report for BaselineReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["n_samples", "n_features", "folds", "score"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.n_samples.to_string(),
            self.n_features.to_string(),
            self.folds.to_string(),
            round_significant(self.score, 6).to_string(),
        ]]
    }
}

fn run(matches: &ArgMatches, cli: Cli) -> anyhow::Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::GenData(args) => {
            let data = dataset::generate_toy(args.samples, args.features, args.significant, args.threshold, args.seed)
                .map_err(lib)?;
            data.save_csv(&args.output, &args.target)?;
            let positive = data.target().iter().filter(|&&y| y == 1).count();
            println!(
                "wrote {} rows x {} features ({} positive) to {}",
                data.n_samples(),
                data.n_features(),
                positive,
                args.output.display()
            );
        }
        Command::RunGa(args) => {
            let resolve = Resolver::new(matches, args.data.preset);
            let config = ga_config(
                &args.search,
                resolve.pick("pop", args.search.pop, Preset::population_size),
                args.mu,
                resolve.pick("generations", args.generations, Preset::generations),
            );
            config.validate().map_err(lib)?;
            let spec = estimator_spec(&args.eval)?;
            let data = load_data(&args.data, &resolve)?;
            let cv = validator(&data, &args.eval, &spec)?;
            let scorer = Scorer::new(&data, &cv).with_execution(execution(&args.eval));
            let report = run_ga(&config, &scorer, &ScoreCache::new()).map_err(lib)?;
            finish_run(report, &args.out, started)?;
        }
        Command::RunFastSlow(args) => {
            let resolve = Resolver::new(matches, args.data.preset);
            let config = fast_slow_config(&args.search, &args.islands, &resolve);
            config.validate().map_err(lib)?;
            let spec = estimator_spec(&args.eval)?;
            let data = load_data(&args.data, &resolve)?;
            let cv = validator(&data, &args.eval, &spec)?;
            let scorer = Scorer::new(&data, &cv).with_execution(execution(&args.eval));
            let report = run_fast_slow(&config, &scorer, &ScoreCache::new()).map_err(lib)?;
            finish_run(report, &args.out, started)?;
        }
        Command::SweepMu(args) => {
            let resolve = Resolver::new(matches, args.data.preset);
            let values = if args.values.is_empty() {
                default_mutation_grid()
            } else {
                args.values.clone()
            };
            let config = ga_config(
                &args.search,
                resolve.pick("pop", args.search.pop, Preset::population_size),
                values[0],
                resolve.pick("generations", args.generations, Preset::generations),
            );
            config.validate().map_err(lib)?;
            let runs = resolve.pick("runs", args.runs, Preset::runs);
            let spec = estimator_spec(&args.eval)?;
            let data = load_data(&args.data, &resolve)?;
            let cv = validator(&data, &args.eval, &spec)?;
            let scorer = Scorer::new(&data, &cv).with_execution(execution(&args.eval));
            let summary = mutation_sweep(&values, runs, &config, args.search.seed, &scorer).map_err(lib)?;
            finish(&summary, &args.out, &sweep_summary_line(&summary, data.feature_names()))?;
        }
        Command::SweepAlpha(args) => {
            let resolve = Resolver::new(matches, args.data.preset);
            let config = fast_slow_config(&args.search, &args.islands, &resolve);
            config.validate().map_err(lib)?;
            let runs = resolve.pick("runs", args.runs, Preset::runs);
            let spec = estimator_spec(&args.eval)?;
            let data = load_data(&args.data, &resolve)?;
            let cv = validator(&data, &args.eval, &spec)?;
            let scorer = Scorer::new(&data, &cv).with_execution(execution(&args.eval));
            let summary = alpha_sweep(&args.values, runs, &config, args.search.seed, &scorer).map_err(lib)?;
            finish(&summary, &args.out, &sweep_summary_line(&summary, data.feature_names()))?;
        }
        Command::Baseline(args) => {
            let resolve = Resolver::new(matches, args.data.preset);
            let spec = estimator_spec(&args.eval)?;
            let data = load_data(&args.data, &resolve)?;
            let cv = validator(&data, &args.eval, &spec)?;
            let report = BaselineReport {
                schema_version: SCHEMA_VERSION,
                n_samples: data.n_samples(),
                n_features: data.n_features(),
                folds: cv.k(),
                estimator: spec,
                score: baseline_no_selection(&cv)?,
            };
            let summary = format!(
                "baseline score {:.4} with all {} feature(s): {}",
                report.score,
                data.n_features(),
                data.feature_names().join(", ")
            );
            finish(&report, &args.out, &summary)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&matches, cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
