//! NK fitness landscapes with per-locus weights.
//!
//! The crate covers the whole pipeline of an NK adaptive-walk study:
//!
//! - [`landscape`]: genotypes, epistasis maps, random fitness tables and the
//!   weighted fitness function `F(x) = Σ φ_i f_i(x_i, x_{i_1}, …, x_{i_K})`.
//! - [`search`]: first-improvement adaptive walks, steepest ascent and long jumps.
//! - [`oracle`]: exhaustive enumeration, local optima and basins of attraction.
//! - [`experiment`]: the seeded Monte Carlo runner and its per-K summaries.
//! - [`output`] and [`cli`]: CSV/JSON results, SVG plots and the `nk-sim` binary.
//!
//! All randomness comes from explicit [`rng::Stream`]s, so every result is a
//! pure function of its inputs and a 64-bit seed.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod landscape;
pub mod oracle;
pub mod output;
pub mod rng;
pub mod search;

pub use error::{Error, Result};
pub use experiment::{
    aggregate, derive_stream, run_experiment, ExperimentConfig, KSummary, LandscapeMode,
    StreamPurpose, WeightSpec,
};
pub use landscape::{
    EpistasisMap, EpistasisPattern, FitnessTable, Genotype, Landscape, WeightVector, ITDC_BETAS,
};
pub use oracle::{census, enumerate, mean_local_optimum_fitness, LandscapeCensus};
pub use rng::Stream;
pub use search::{
    adaptive_walk, is_local_optimum, long_jump_walk, steepest_ascent_walk, walk, SearchStrategy,
    StrategyKind, WalkTrace,
};
