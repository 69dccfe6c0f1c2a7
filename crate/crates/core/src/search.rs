//! Adaptive walks over a fixed landscape.
//!
//! Evaluation budgets count fitness evaluations of candidate moves; the
//! starting point's own evaluation is free. A budget of `N` is therefore
//! enough for local search to certify that the start is a local optimum.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{Genotype, Landscape};

/// Default evaluation cap per locus.
pub const BUDGET_PER_LOCUS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Scan the 1-mutant neighbors in a fresh random order and take the first
    /// strictly fitter one; stop when none is fitter.
    FirstImprovement,
    /// Move to the fittest strictly improving neighbor, lowest locus on ties.
    SteepestAscent,
    /// Propose flipping `jump_width` distinct random loci at once and accept
    /// strict improvements until the budget is spent.
    LongJump { jump_width: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStrategy {
    pub kind: StrategyKind,
    pub max_evaluations: usize,
}

/// Half the loci, rounded up, but never below 2 (or above `n`).
pub fn default_jump_width(n: usize) -> usize {
    n.div_ceil(2).max(2).min(n)
}

impl SearchStrategy {
    pub fn first_improvement(n: usize) -> Self {
        SearchStrategy {
            kind: StrategyKind::FirstImprovement,
            max_evaluations: BUDGET_PER_LOCUS * n,
        }
    }

    pub fn steepest_ascent(n: usize) -> Self {
        SearchStrategy {
            kind: StrategyKind::SteepestAscent,
            max_evaluations: BUDGET_PER_LOCUS * n,
        }
    }

    pub fn long_jump(n: usize, jump_width: usize) -> Self {
        SearchStrategy {
            kind: StrategyKind::LongJump { jump_width },
            max_evaluations: BUDGET_PER_LOCUS * n,
        }
    }

    pub fn with_budget(mut self, max_evaluations: usize) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.kind {
            StrategyKind::FirstImprovement | StrategyKind::SteepestAscent => {
                check_local_budget(self.max_evaluations, n)
            }
            StrategyKind::LongJump { jump_width } => {
                check_jump(jump_width, self.max_evaluations, n)
            }
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            StrategyKind::FirstImprovement => "first_improvement".into(),
            StrategyKind::SteepestAscent => "steepest_ascent".into(),
            StrategyKind::LongJump { jump_width } => format!("long_jump(w={jump_width})"),
        }
    }
}

fn check_local_budget(max_evaluations: usize, n: usize) -> Result<()> {
    if max_evaluations < n {
        return Err(Error::invalid(format!(
            "evaluation budget {max_evaluations} cannot certify a local optimum over {n} neighbors"
        )));
    }
    Ok(())
}

fn check_jump(jump_width: usize, max_evaluations: usize, n: usize) -> Result<()> {
    if jump_width < 2 || jump_width > n {
        return Err(Error::invalid(format!(
            "jump width must be in 2..={n}, got {jump_width}"
        )));
    }
    if max_evaluations == 0 {
        return Err(Error::invalid("evaluation budget must be at least 1"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub genotype: Genotype,
    pub fitness: f64,
}

/// Accepted points of a walk, starting point first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub steps: Vec<Step>,
    /// The endpoint has no strictly fitter 1-mutant neighbor.
    pub terminated_at_local_optimum: bool,
    pub evaluations_used: usize,
}

impl WalkTrace {
    fn start(genotype: Genotype, fitness: f64) -> Self {
        WalkTrace {
            steps: vec![Step { genotype, fitness }],
            terminated_at_local_optimum: false,
            evaluations_used: 0,
        }
    }

    fn push(&mut self, genotype: Genotype, fitness: f64) {
        self.steps.push(Step { genotype, fitness });
    }

    pub fn endpoint(&self) -> &Step {
        self.steps.last().expect("a trace holds at least its start")
    }

    /// Accepted moves; one less than the number of visited points.
    pub fn moves(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].fitness > w[0].fitness)
    }
}

/// Runs the walk selected by `strategy`.
pub fn walk<R: Rng + ?Sized>(
    landscape: &Landscape,
    start: Genotype,
    strategy: &SearchStrategy,
    rng: &mut R,
) -> Result<WalkTrace> {
    match strategy.kind {
        StrategyKind::FirstImprovement => {
            adaptive_walk(landscape, start, strategy.max_evaluations, rng)
        }
        StrategyKind::SteepestAscent => {
            steepest_ascent_walk(landscape, start, strategy.max_evaluations)
        }
        StrategyKind::LongJump { jump_width } => {
            long_jump_walk(landscape, start, jump_width, strategy.max_evaluations, rng)
        }
    }
}

/// First-improvement adaptive walk.
///
/// Each step shuffles `[0, 1, …, N-1]` with [`SliceRandom::shuffle`] and
/// evaluates the 1-mutant neighbors in that order, moving to the first that
/// is strictly fitter. The walk ends at a local optimum, or early with
/// `terminated_at_local_optimum == false` once `max_evaluations` is spent.
pub fn adaptive_walk<R: Rng + ?Sized>(
    landscape: &Landscape,
    start: Genotype,
    max_evaluations: usize,
    rng: &mut R,
) -> Result<WalkTrace> {
    landscape.check_genotype(&start)?;
    let n = landscape.n();
    check_local_budget(max_evaluations, n)?;

    let mut current = start;
    let mut current_fitness = landscape.fitness(&current);
    let mut trace = WalkTrace::start(current, current_fitness);
    let mut order: Vec<usize> = Vec::with_capacity(n);

    'steps: loop {
        order.clear();
        order.extend(0..n);
        order.shuffle(rng);
        for &locus in &order {
            if trace.evaluations_used == max_evaluations {
                return Ok(trace);
            }
            let candidate = current.flipped(locus);
            let f = landscape.fitness(&candidate);
            trace.evaluations_used += 1;
            if f > current_fitness {
                current = candidate;
                current_fitness = f;
                trace.push(current, current_fitness);
                continue 'steps;
            }
        }
        trace.terminated_at_local_optimum = true;
        return Ok(trace);
    }
}

/// Steepest-ascent walk. Deterministic: ties go to the lowest flipped locus.
/// A step is only started when a full neighborhood scan fits in the budget.
pub fn steepest_ascent_walk(
    landscape: &Landscape,
    start: Genotype,
    max_evaluations: usize,
) -> Result<WalkTrace> {
    landscape.check_genotype(&start)?;
    let n = landscape.n();
    check_local_budget(max_evaluations, n)?;

    let mut current = start;
    let mut current_fitness = landscape.fitness(&current);
    let mut trace = WalkTrace::start(current, current_fitness);

    while max_evaluations - trace.evaluations_used >= n {
        let mut best: Option<(Genotype, f64)> = None;
        for locus in 0..n {
            let candidate = current.flipped(locus);
            let f = landscape.fitness(&candidate);
            if f > best.map_or(current_fitness, |(_, bf)| bf) {
                best = Some((candidate, f));
            }
        }
        trace.evaluations_used += n;
        match best {
            Some((g, f)) => {
                current = g;
                current_fitness = f;
                trace.push(current, current_fitness);
            }
            None => {
                trace.terminated_at_local_optimum = true;
                break;
            }
        }
    }
    Ok(trace)
}

/// Long-jump search: every proposal flips `jump_width` distinct loci chosen
/// by a partial Fisher-Yates shuffle of `[0, 1, …, N-1]`, and is accepted
/// only if strictly fitter. Runs until `max_evaluations` proposals have been
/// made.
///
/// The local-optimum flag is settled afterwards by a 1-mutant scan of the
/// endpoint that is not charged to the budget.
pub fn long_jump_walk<R: Rng + ?Sized>(
    landscape: &Landscape,
    start: Genotype,
    jump_width: usize,
    max_evaluations: usize,
    rng: &mut R,
) -> Result<WalkTrace> {
    landscape.check_genotype(&start)?;
    let n = landscape.n();
    check_jump(jump_width, max_evaluations, n)?;

    let mut current = start;
    let mut current_fitness = landscape.fitness(&current);
    let mut trace = WalkTrace::start(current, current_fitness);
    let mut loci: Vec<usize> = Vec::with_capacity(n);

    while trace.evaluations_used < max_evaluations {
        loci.clear();
        loci.extend(0..n);
        for j in 0..jump_width {
            let r = rng.gen_range(j..n);
            loci.swap(j, r);
        }
        let candidate = current.flipped_many(&loci[..jump_width]);
        let f = landscape.fitness(&candidate);
        trace.evaluations_used += 1;
        if f > current_fitness {
            current = candidate;
            current_fitness = f;
            trace.push(current, current_fitness);
        }
    }
    trace.terminated_at_local_optimum = local_optimum(landscape, &current, current_fitness);
    Ok(trace)
}

fn local_optimum(landscape: &Landscape, genotype: &Genotype, fitness: f64) -> bool {
    (0..landscape.n()).all(|i| landscape.fitness(&genotype.flipped(i)) <= fitness)
}

/// True iff no 1-mutant neighbor is strictly fitter.
pub fn is_local_optimum(landscape: &Landscape, genotype: &Genotype) -> Result<bool> {
    let f = landscape.evaluate(genotype)?;
    Ok(local_optimum(landscape, genotype, f))
}
