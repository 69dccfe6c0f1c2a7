//! `nk-sim` command line.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 1 for
//! runtime failures such as unwritable output paths.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::experiment::{
    derive_stream, run_experiment_with, Execution, ExperimentConfig, LandscapeMode, StreamPurpose,
    WeightSpec,
};
use crate::landscape::{EpistasisPattern, Genotype, Landscape, ITDC_BETAS};
use crate::oracle::{census, census_study, CensusSummary, LandscapeCensus};
use crate::output::{emit_plot, write_records_file, write_results, Format, RunInfo};
use crate::search::{default_jump_width, walk, SearchStrategy, WalkTrace, BUDGET_PER_LOCUS};

#[derive(Parser, Debug)]
#[command(
    name = "nk-sim",
    version,
    about = "NK fitness landscape simulations with weighted loci"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the adaptive-walk study for every K and write per-K summaries.
    Simulate(SimulateArgs),
    /// Exhaustively analyse random landscapes: optima counts, fitness, basins.
    Census(CensusArgs),
    /// Run and print one traced walk.
    Walk(WalkArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PatternArg {
    Random,
    Adjacent,
}

impl From<PatternArg> for EpistasisPattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Random => EpistasisPattern::Random,
            PatternArg::Adjacent => EpistasisPattern::Adjacent,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    PerSim,
    FixedPerRun,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    First,
    Steepest,
    Longjump,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct LandscapeArgs {
    /// Number of loci.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// `equal`, `itdc` or comma-separated path weights [default: itdc when n = 5, else equal]
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, value_enum, default_value = "random")]
    pattern: PatternArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl LandscapeArgs {
    fn weight_spec(&self) -> Result<WeightSpec, Error> {
        match &self.weights {
            Some(w) => w.parse(),
            None if self.n == ITDC_BETAS.len() => Ok(WeightSpec::Itdc),
            None => Ok(WeightSpec::Equal),
        }
    }
}

#[derive(Args, Debug)]
struct StrategyArgs {
    #[arg(long, value_enum, default_value = "first")]
    strategy: StrategyArg,
    /// Loci flipped per long jump [default: half of n, rounded up, at least 2]
    #[arg(long)]
    jump_width: Option<usize>,
    /// Evaluation budget per walk [default: 100 * n]
    #[arg(long)]
    max_evals: Option<usize>,
}

impl StrategyArgs {
    fn strategy(&self, n: usize) -> SearchStrategy {
        let s = match self.strategy {
            StrategyArg::First => SearchStrategy::first_improvement(n),
            StrategyArg::Steepest => SearchStrategy::steepest_ascent(n),
            StrategyArg::Longjump => SearchStrategy::long_jump(
                n,
                self.jump_width.unwrap_or_else(|| default_jump_width(n)),
            ),
        };
        s.with_budget(self.max_evals.unwrap_or(BUDGET_PER_LOCUS * n))
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    landscape: LandscapeArgs,
    /// Comma-separated epistasis degrees.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Simulations per run.
    #[arg(long, default_value_t = 10_000)]
    sims: usize,
    #[arg(long, value_enum, default_value = "per-sim")]
    landscape_mode: ModeArg,
    #[command(flatten)]
    strategy: StrategyArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG chart; a `.tsv` data file is written next to it.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Per-simulation CSV records for audit.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Debug)]
struct CensusArgs {
    #[command(flatten)]
    landscape: LandscapeArgs,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Landscapes to draw.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// JSON output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WalkArgs {
    #[command(flatten)]
    landscape: LandscapeArgs,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[command(flatten)]
    strategy: StrategyArgs,
    /// Starting genotype as a bit string [default: drawn from the seed]
    #[arg(long)]
    start: Option<String>,
    /// JSON output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Census(a) => run_census(a),
        Command::Walk(a) => run_walk(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let n = a.landscape.n;
    let config = ExperimentConfig {
        n,
        k_values: a.k.clone(),
        runs: a.runs,
        sims_per_run: a.sims,
        weights: a.landscape.weight_spec()?,
        pattern: a.landscape.pattern.into(),
        landscape_mode: match a.landscape_mode {
            ModeArg::PerSim => LandscapeMode::PerSimulation,
            ModeArg::FixedPerRun => LandscapeMode::FixedPerRun,
        },
        strategy: a.strategy.strategy(n),
        master_seed: a.landscape.seed,
    };
    config.validate()?;
    let format = match a.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let out = run_experiment_with(
        &config,
        Execution::Parallel { threads: a.threads },
        a.records.is_some(),
    )?;
    write_results(
        &out.summaries,
        RunInfo::from_config(&config),
        format,
        a.out.as_deref(),
    )?;
    if let (Some(path), Some(records)) = (&a.records, &out.records) {
        write_records_file(path, records)?;
    }
    if let Some(path) = &a.plot {
        emit_plot(&out.summaries, path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CensusReport {
    pattern: &'static str,
    weights: String,
    seed: u64,
    version: &'static str,
    /// `2^n / (n + 1)`, the expected count on a fully random (K = n - 1) landscape.
    random_landscape_optima_expectation: f64,
    summary: CensusSummary,
    /// Full census when a single landscape was sampled.
    #[serde(skip_serializing_if = "Option::is_none")]
    landscape: Option<LandscapeCensus>,
}

fn run_census(a: CensusArgs) -> Result<(), Failure> {
    let n = a.landscape.n;
    let spec = a.landscape.weight_spec()?;
    let weights = spec.resolve(n)?;
    let pattern: EpistasisPattern = a.landscape.pattern.into();
    let mut rng = derive_stream(a.landscape.seed, a.k, 0, 0, StreamPurpose::Landscape);
    let summary = census_study(n, a.k, &weights, pattern, a.samples, &mut rng)?;
    let landscape = if a.samples == 1 {
        let mut rng = derive_stream(a.landscape.seed, a.k, 0, 0, StreamPurpose::Landscape);
        Some(census(&Landscape::random(
            n, a.k, pattern, weights, &mut rng,
        )?)?)
    } else {
        None
    };
    let report = CensusReport {
        pattern: pattern.label(),
        weights: spec.label(),
        seed: a.landscape.seed,
        version: env!("CARGO_PKG_VERSION"),
        random_landscape_optima_expectation: (1u64 << n.min(63)) as f64 / (n + 1) as f64,
        summary,
        landscape,
    };
    write_json_to(&report, a.out.as_deref())
}

#[derive(Serialize)]
struct WalkReport {
    n: usize,
    k: usize,
    pattern: &'static str,
    weights: String,
    strategy: String,
    seed: u64,
    landscape: Landscape,
    trace: WalkTrace,
}

/// Uses the streams of simulation `(k, run 0, sim 0)`, so the walk matches
/// the first record of a `simulate` run with the same settings.
fn run_walk(a: WalkArgs) -> Result<(), Failure> {
    let n = a.landscape.n;
    let seed = a.landscape.seed;
    let spec = a.landscape.weight_spec()?;
    let pattern: EpistasisPattern = a.landscape.pattern.into();
    let strategy = a.strategy.strategy(n);
    strategy.validate(n)?;
    let mut lrng = derive_stream(seed, a.k, 0, 0, StreamPurpose::Landscape);
    let landscape = Landscape::random(n, a.k, pattern, spec.resolve(n)?, &mut lrng)?;
    let start = match &a.start {
        Some(s) => s.parse::<Genotype>()?,
        None => Genotype::random(n, &mut derive_stream(seed, a.k, 0, 0, StreamPurpose::Start))?,
    };
    let mut wrng = derive_stream(seed, a.k, 0, 0, StreamPurpose::Walk);
    let trace = walk(&landscape, start, &strategy, &mut wrng)?;
    let report = WalkReport {
        n,
        k: a.k,
        pattern: pattern.label(),
        weights: spec.label(),
        strategy: strategy.label(),
        seed,
        landscape,
        trace,
    };
    write_json_to(&report, a.out.as_deref())
}

fn write_json_to<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))
        }
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}
