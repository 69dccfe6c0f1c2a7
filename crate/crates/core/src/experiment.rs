//! The Monte Carlo study runner.
//!
//! For every K the runner executes `runs × sims_per_run` independent
//! simulations. A simulation draws a uniform start genotype, obtains a
//! landscape (fresh, or the one shared by its run), walks it and records the
//! endpoint. Each simulation reads only its own derived streams, and the
//! per-K reduction always runs in ascending `(run, sim)` order, so results do
//! not depend on thread count or scheduling.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{EpistasisPattern, Genotype, Landscape, WeightVector, ITDC_BETAS, MAX_K};
use crate::rng::{mix64, Stream};
use crate::search::{adaptive_walk, long_jump_walk, walk, SearchStrategy};

/// Locus weighting used to build landscapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    Equal,
    /// The five IT-enabled dynamic capability path coefficients; requires n = 5.
    Itdc,
    Betas(Vec<f64>),
}

impl WeightSpec {
    pub fn resolve(&self, n: usize) -> Result<WeightVector> {
        match self {
            WeightSpec::Equal => WeightVector::equal(n),
            WeightSpec::Itdc if n == ITDC_BETAS.len() => Ok(WeightVector::itdc()),
            WeightSpec::Itdc => Err(Error::invalid(format!(
                "itdc weights describe {} capabilities, but n = {n}",
                ITDC_BETAS.len()
            ))),
            WeightSpec::Betas(b) if b.len() == n => WeightVector::from_betas(b),
            WeightSpec::Betas(b) => Err(Error::invalid(format!(
                "{} path weights supplied for n = {n}",
                b.len()
            ))),
        }
    }

    /// `equal`, `itdc`, or `betas:b1;b2;…` (no commas, so it sits in a CSV cell).
    pub fn label(&self) -> String {
        match self {
            WeightSpec::Equal => "equal".into(),
            WeightSpec::Itdc => "itdc".into(),
            WeightSpec::Betas(b) => {
                let parts: Vec<String> = b.iter().map(f64::to_string).collect();
                format!("betas:{}", parts.join(";"))
            }
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    /// Accepts `equal`, `itdc` or a comma-separated list of path weights.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "equal" => Ok(WeightSpec::Equal),
            "itdc" => Ok(WeightSpec::Itdc),
            list => {
                let betas = list
                    .split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::invalid(format!("not a path weight: {p:?}")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                WeightVector::from_betas(&betas)?;
                Ok(WeightSpec::Betas(betas))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeMode {
    /// Every simulation draws its own landscape.
    #[default]
    PerSimulation,
    /// All simulations of a run share one landscape.
    FixedPerRun,
}

impl LandscapeMode {
    pub fn label(&self) -> &'static str {
        match self {
            LandscapeMode::PerSimulation => "per_simulation",
            LandscapeMode::FixedPerRun => "fixed_per_run",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k_values: Vec<usize>,
    pub runs: usize,
    pub sims_per_run: usize,
    pub weights: WeightSpec,
    pub pattern: EpistasisPattern,
    pub landscape_mode: LandscapeMode,
    pub strategy: SearchStrategy,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    /// Five capabilities, K = 0..=4, 5 runs of 10,000 first-improvement walks
    /// on freshly drawn ITDC-weighted landscapes.
    fn default() -> Self {
        ExperimentConfig {
            n: 5,
            k_values: (0..5).collect(),
            runs: 5,
            sims_per_run: 10_000,
            weights: WeightSpec::Itdc,
            pattern: EpistasisPattern::Random,
            landscape_mode: LandscapeMode::PerSimulation,
            strategy: SearchStrategy::first_improvement(5),
            master_seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<WeightVector> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.k_values.is_empty() {
            return Err(Error::invalid("no K values given"));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k >= self.n) {
            return Err(Error::invalid(format!(
                "K = {k} is out of range for n = {} (need K <= {})",
                self.n,
                self.n - 1
            )));
        }
        if self.runs == 0 || self.sims_per_run == 0 {
            return Err(Error::invalid("runs and sims_per_run must be at least 1"));
        }
        self.strategy.validate(self.n)?;
        let weights = self.weights.resolve(self.n)?;
        if let Some(k) = self.k_values.iter().find(|&&k| k > MAX_K) {
            return Err(Error::invalid(format!(
                "K = {k} exceeds the supported maximum {MAX_K}"
            )));
        }
        Ok(weights)
    }

    pub fn total_simulations(&self) -> usize {
        self.runs * self.sims_per_run
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamPurpose {
    Landscape,
    Start,
    Walk,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Landscape => 1,
            StreamPurpose::Start => 2,
            StreamPurpose::Walk => 3,
        }
    }
}

/// Seed of the stream for one `(k, run, sim, purpose)` slot.
///
/// The tuple is folded into the master seed one field at a time with the
/// SplitMix64 mixer: `h = mix(seed); h = mix(h ^ k); h = mix(h ^ run);
/// h = mix(h ^ sim); h = mix(h ^ tag)`, with tags 1, 2, 3 for landscape,
/// start and walk. The result seeds a [`Stream`] through `seed_from_u64`.
pub fn stream_seed(
    master_seed: u64,
    k: usize,
    run: usize,
    sim: usize,
    purpose: StreamPurpose,
) -> u64 {
    [k as u64, run as u64, sim as u64, purpose.tag()]
        .into_iter()
        .fold(mix64(master_seed), |h, field| mix64(h ^ field))
}

pub fn derive_stream(
    master_seed: u64,
    k: usize,
    run: usize,
    sim: usize,
    purpose: StreamPurpose,
) -> Stream {
    Stream::seed_from_u64(stream_seed(master_seed, k, run, sim, purpose))
}

/// Outcome of one simulation, kept for audit output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub k: usize,
    pub run: usize,
    pub sim: usize,
    pub start: Genotype,
    pub endpoint: Genotype,
    pub fitness: f64,
    pub moves: usize,
    pub evaluations: usize,
    pub terminated_at_local_optimum: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    pub k: usize,
    pub mean_endpoint_fitness: f64,
    /// Population standard deviation of endpoint fitness.
    pub stddev: f64,
    pub stderr: f64,
    pub mean_walk_moves: f64,
    pub simulations: usize,
}

impl KSummary {
    /// `(self - other) / sqrt(se_self² + se_other²)`.
    pub fn z_difference(&self, other: &KSummary) -> f64 {
        let pooled = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        (self.mean_endpoint_fitness - other.mean_endpoint_fitness) / pooled
    }
}

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance (divides by the count).
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }

    pub fn stddev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.stddev() / (self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::default();
        iter.into_iter().for_each(|x| s.push(x));
        s
    }
}

/// Single-pass summary of endpoint fitnesses and move counts, in input order.
pub fn aggregate(k: usize, fitnesses: &[f64], moves: &[usize]) -> Result<KSummary> {
    if fitnesses.is_empty() {
        return Err(Error::ContractViolation(
            "cannot aggregate zero simulations".into(),
        ));
    }
    if fitnesses.len() != moves.len() {
        return Err(Error::ContractViolation(format!(
            "{} fitness values but {} move counts",
            fitnesses.len(),
            moves.len()
        )));
    }
    let fit: RunningStats = fitnesses.iter().copied().collect();
    let mv: RunningStats = moves.iter().map(|&m| m as f64).collect();
    Ok(KSummary {
        k,
        mean_endpoint_fitness: fit.mean(),
        stddev: fit.stddev(),
        stderr: fit.stderr(),
        mean_walk_moves: mv.mean(),
        simulations: fitnesses.len(),
    })
}

/// How simulations are scheduled. Results are identical either way.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `threads == 0` lets rayon pick.
    Parallel {
        threads: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub summaries: Vec<KSummary>,
    /// Per-simulation records, when requested; ordered by `(k, run, sim)`.
    pub records: Option<Vec<SimulationRecord>>,
}

fn landscape_for(
    config: &ExperimentConfig,
    weights: &WeightVector,
    k: usize,
    run: usize,
    sim: usize,
) -> Result<Landscape> {
    let mut rng = derive_stream(config.master_seed, k, run, sim, StreamPurpose::Landscape);
    Landscape::random(config.n, k, config.pattern, weights.clone(), &mut rng)
}

/// One simulation. `shared` is the run's landscape in fixed-per-run mode.
pub fn simulate_one(
    config: &ExperimentConfig,
    weights: &WeightVector,
    k: usize,
    run: usize,
    sim: usize,
    shared: Option<&Landscape>,
) -> Result<SimulationRecord> {
    let owned;
    let landscape = match shared {
        Some(l) => l,
        None => {
            owned = landscape_for(config, weights, k, run, sim)?;
            &owned
        }
    };
    let mut start_rng = derive_stream(config.master_seed, k, run, sim, StreamPurpose::Start);
    let start = Genotype::random(config.n, &mut start_rng)?;
    let mut walk_rng = derive_stream(config.master_seed, k, run, sim, StreamPurpose::Walk);
    let trace = walk(landscape, start, &config.strategy, &mut walk_rng)?;
    let end = trace.endpoint();
    Ok(SimulationRecord {
        k,
        run,
        sim,
        start,
        endpoint: end.genotype,
        fitness: end.fitness,
        moves: trace.moves(),
        evaluations: trace.evaluations_used,
        terminated_at_local_optimum: trace.terminated_at_local_optimum,
    })
}

fn run_k(
    config: &ExperimentConfig,
    weights: &WeightVector,
    k: usize,
    parallel: bool,
) -> Result<Vec<SimulationRecord>> {
    // Fixed-per-run landscapes come from the landscape stream of sim 0.
    let shared: Vec<Landscape> = match config.landscape_mode {
        LandscapeMode::PerSimulation => Vec::new(),
        LandscapeMode::FixedPerRun => (0..config.runs)
            .map(|run| landscape_for(config, weights, k, run, 0))
            .collect::<Result<_>>()?,
    };
    let sims = config.sims_per_run;
    let one = |i: usize| {
        let (run, sim) = (i / sims, i % sims);
        simulate_one(config, weights, k, run, sim, shared.get(run))
    };
    let total = config.total_simulations();
    if parallel {
        (0..total).into_par_iter().map(one).collect()
    } else {
        (0..total).map(one).collect()
    }
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    execution: Execution,
    keep_records: bool,
) -> Result<ExperimentOutput> {
    let weights = config.validate()?;
    let body = |parallel: bool| -> Result<ExperimentOutput> {
        let mut summaries = Vec::with_capacity(config.k_values.len());
        let mut kept = keep_records.then(Vec::new);
        for &k in &config.k_values {
            let records = run_k(config, &weights, k, parallel)?;
            let fitnesses: Vec<f64> = records.iter().map(|r| r.fitness).collect();
            let moves: Vec<usize> = records.iter().map(|r| r.moves).collect();
            summaries.push(aggregate(k, &fitnesses, &moves)?);
            if let Some(all) = kept.as_mut() {
                all.extend(records);
            }
        }
        Ok(ExperimentOutput {
            summaries,
            records: kept,
        })
    };
    match execution {
        Execution::Sequential => body(false),
        Execution::Parallel { threads } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
            pool.install(|| body(true))
        }
    }
}

/// Runs the study on all available cores and returns one summary per K.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<KSummary>> {
    Ok(run_experiment_with(config, Execution::Parallel { threads: 0 }, false)?.summaries)
}

/// Long jumps against first-improvement local search on paired landscapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub landscapes: usize,
    pub mean_first_improvement: f64,
    pub mean_long_jump: f64,
    /// Mean of `first_improvement - long_jump` per landscape.
    pub mean_difference: f64,
    pub difference_stderr: f64,
}

/// For each landscape both searches start from the same genotype, and the
/// long-jump search is granted exactly the evaluations the local search used.
#[allow(clippy::too_many_arguments)]
pub fn compare_long_jump(
    n: usize,
    k: usize,
    weights: &WeightSpec,
    pattern: EpistasisPattern,
    jump_width: usize,
    landscapes: usize,
    master_seed: u64,
) -> Result<PairedComparison> {
    if landscapes == 0 {
        return Err(Error::invalid("at least one landscape is required"));
    }
    let phi = weights.resolve(n)?;
    let outcomes: Vec<(f64, f64)> = (0..landscapes)
        .into_par_iter()
        .map(|i| {
            let mut lrng = derive_stream(master_seed, k, 0, i, StreamPurpose::Landscape);
            let landscape = Landscape::random(n, k, pattern, phi.clone(), &mut lrng)?;
            let mut srng = derive_stream(master_seed, k, 0, i, StreamPurpose::Start);
            let start = Genotype::random(n, &mut srng)?;
            let mut wrng = derive_stream(master_seed, k, 0, i, StreamPurpose::Walk);
            let local = adaptive_walk(&landscape, start, usize::MAX, &mut wrng)?;
            let jump = long_jump_walk(
                &landscape,
                start,
                jump_width,
                local.evaluations_used,
                &mut wrng,
            )?;
            Ok((local.endpoint().fitness, jump.endpoint().fitness))
        })
        .collect::<Result<_>>()?;
    let first: RunningStats = outcomes.iter().map(|o| o.0).collect();
    let jump: RunningStats = outcomes.iter().map(|o| o.1).collect();
    let diff: RunningStats = outcomes.iter().map(|o| o.0 - o.1).collect();
    Ok(PairedComparison {
        landscapes,
        mean_first_improvement: first.mean(),
        mean_long_jump: jump.mean(),
        mean_difference: diff.mean(),
        difference_stderr: diff.stderr(),
    })
}

impl fmt::Display for KSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "K={} mean={:.5} sd={:.5} se={:.5} moves={:.3} sims={}",
            self.k,
            self.mean_endpoint_fitness,
            self.stddev,
            self.stderr,
            self.mean_walk_moves,
            self.simulations
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::unit_uniform;
    use rand::RngCore;
    use std::collections::HashSet;

    #[test]
    fn aggregate_basics() {
        let s = aggregate(2, &[0.5, 0.7], &[1, 3]).unwrap();
        assert!((s.mean_endpoint_fitness - 0.6).abs() < 1e-15);
        assert!((s.stddev - 0.1).abs() < 1e-15);
        assert!((s.stderr - 0.1 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.mean_walk_moves, 2.0);
        assert_eq!(s.simulations, 2);

        let c = aggregate(0, &[0.3; 1000], &[0; 1000]).unwrap();
        assert_eq!(c.stddev, 0.0);
        assert_eq!(c.mean_endpoint_fitness, 0.3);

        assert!(matches!(
            aggregate(0, &[], &[]),
            Err(Error::ContractViolation(_))
        ));
        assert!(aggregate(0, &[0.1], &[]).is_err());
    }

    #[test]
    fn aggregate_of_a_uniform_stream() {
        let mut rng = crate::rng::stream_from_seed(2024);
        let xs: Vec<f64> = (0..1_000_000).map(|_| unit_uniform(&mut rng)).collect();
        let s = aggregate(0, &xs, &vec![0; xs.len()]).unwrap();
        assert!((s.mean_endpoint_fitness - 0.5).abs() < 3.0 * s.stderr);
        assert!((s.stddev - (1.0f64 / 12.0).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let first = |k, r, s, p| {
            let mut rng = derive_stream(42, k, r, s, p);
            (0..100).map(|_| rng.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(
            first(0, 0, 0, StreamPurpose::Walk),
            first(0, 0, 0, StreamPurpose::Walk)
        );
        assert_ne!(
            first(0, 0, 0, StreamPurpose::Walk),
            first(0, 0, 1, StreamPurpose::Walk)
        );
        assert_ne!(
            first(0, 0, 0, StreamPurpose::Walk),
            first(0, 0, 0, StreamPurpose::Start)
        );
        assert_ne!(
            first(1, 0, 0, StreamPurpose::Walk),
            first(0, 1, 0, StreamPurpose::Walk)
        );
    }

    #[test]
    fn no_seed_collisions_over_the_default_study() {
        let c = ExperimentConfig::default();
        let mut seen = HashSet::new();
        for &k in &c.k_values {
            for run in 0..c.runs {
                for sim in 0..c.sims_per_run {
                    for p in [
                        StreamPurpose::Landscape,
                        StreamPurpose::Start,
                        StreamPurpose::Walk,
                    ] {
                        assert!(seen.insert(stream_seed(c.master_seed, k, run, sim, p)));
                    }
                }
            }
        }
        assert_eq!(seen.len(), 5 * 5 * 10_000 * 3);
    }

    #[test]
    fn weight_spec_parsing() {
        assert_eq!("equal".parse::<WeightSpec>().unwrap(), WeightSpec::Equal);
        assert_eq!("itdc".parse::<WeightSpec>().unwrap(), WeightSpec::Itdc);
        assert_eq!(
            "3,1".parse::<WeightSpec>().unwrap(),
            WeightSpec::Betas(vec![3.0, 1.0])
        );
        assert!("3,-1".parse::<WeightSpec>().is_err());
        assert!("heavy".parse::<WeightSpec>().is_err());
        assert_eq!(WeightSpec::Betas(vec![3.0, 1.5]).label(), "betas:3;1.5");
        assert!(WeightSpec::Itdc.resolve(4).is_err());
        assert!(WeightSpec::Betas(vec![1.0; 3]).resolve(4).is_err());
        assert_eq!(WeightSpec::Itdc.resolve(5).unwrap(), WeightVector::itdc());
    }

    #[test]
    fn config_validation() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.k_values = vec![5]));
        assert!(bad(|c| c.k_values.clear()));
        assert!(bad(|c| c.runs = 0));
        assert!(bad(|c| c.sims_per_run = 0));
        assert!(bad(|c| c.n = 4));
        assert!(bad(
            |c| c.strategy = SearchStrategy::first_improvement(5).with_budget(3)
        ));
        assert!(bad(|c| c.strategy = SearchStrategy::long_jump(5, 6)));
    }

    fn small(seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            runs: 2,
            sims_per_run: 300,
            master_seed: seed,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn schedule_independence() {
        for mode in [LandscapeMode::PerSimulation, LandscapeMode::FixedPerRun] {
            let c = ExperimentConfig {
                landscape_mode: mode,
                ..small(5)
            };
            let seq = run_experiment_with(&c, Execution::Sequential, true).unwrap();
            let par = run_experiment_with(&c, Execution::Parallel { threads: 4 }, true).unwrap();
            assert_eq!(seq, par);
            assert_eq!(seq.records.unwrap().len(), 5 * 600);
        }
    }

    #[test]
    fn single_simulation_is_reproducible() {
        let c = ExperimentConfig {
            k_values: vec![0],
            runs: 1,
            sims_per_run: 1,
            master_seed: 7,
            ..ExperimentConfig::default()
        };
        let a = run_experiment_with(&c, Execution::Sequential, true).unwrap();
        let b = run_experiment_with(&c, Execution::Sequential, true).unwrap();
        assert_eq!(a.records.as_ref().unwrap().len(), 1);
        assert_eq!(a, b);
        assert_eq!(a.summaries[0].simulations, 1);
        assert_eq!(a.summaries[0].stddev, 0.0);
    }

    #[test]
    fn fixed_per_run_shares_landscapes() {
        let c = ExperimentConfig {
            k_values: vec![4],
            landscape_mode: LandscapeMode::FixedPerRun,
            strategy: SearchStrategy::steepest_ascent(5),
            ..small(8)
        };
        let out = run_experiment_with(&c, Execution::Sequential, true).unwrap();
        // Same run, same start: same landscape means same steepest-ascent endpoint.
        let recs = out.records.unwrap();
        let weights = c.validate().unwrap();
        let shared = landscape_for(&c, &weights, 4, 1, 0).unwrap();
        for r in recs.iter().filter(|r| r.run == 1) {
            assert_eq!(shared.evaluate(&r.endpoint).unwrap(), r.fitness);
        }
    }

    #[test]
    fn simulations_bookkeeping() {
        let c = small(1);
        for s in run_experiment(&c).unwrap() {
            assert_eq!(s.simulations, c.runs * c.sims_per_run);
            assert!((0.0..1.0).contains(&s.mean_endpoint_fitness));
            assert!(s.stddev >= 0.0);
        }
    }
}
