//! Exhaustive ground truth for small landscapes.
//!
//! Nothing here calls into [`crate::search`]: local optima and basins are
//! computed directly on the enumerated fitness vector, so the oracle can be
//! used to check the walkers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::RunningStats;
use crate::landscape::{EpistasisPattern, Genotype, Landscape, WeightVector};

pub const ENUMERATE_LIMIT: usize = 24;
pub const CENSUS_LIMIT: usize = 20;

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Intractable { n, limit });
    }
    Ok(())
}

/// All `2^N` genotypes with their fitness, in ascending index order.
pub fn enumerate(landscape: &Landscape) -> Result<Vec<(Genotype, f64)>> {
    let n = landscape.n();
    check_limit(n, ENUMERATE_LIMIT)?;
    (0..1u64 << n)
        .map(|idx| {
            let g = Genotype::from_index(idx, n)?;
            Ok((g, landscape.evaluate(&g)?))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalOptimum {
    pub genotype: Genotype,
    pub fitness: f64,
    /// Genotypes whose steepest ascent ends here (including itself).
    pub basin_size: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCensus {
    /// The fittest genotype; lowest index on exact ties.
    pub global_optimum: LocalOptimum,
    /// Every local optimum in ascending genotype index order.
    pub local_optima: Vec<LocalOptimum>,
}

impl LandscapeCensus {
    pub fn optima_count(&self) -> usize {
        self.local_optima.len()
    }

    pub fn find(&self, genotype: &Genotype) -> Option<&LocalOptimum> {
        self.local_optima
            .binary_search_by_key(&genotype.index(), |o| o.genotype.index())
            .ok()
            .map(|i| &self.local_optima[i])
    }

    pub fn contains(&self, genotype: &Genotype) -> bool {
        self.find(genotype).is_some()
    }

    pub fn basin_size(&self, genotype: &Genotype) -> Option<u64> {
        self.find(genotype).map(|o| o.basin_size)
    }

    pub fn mean_local_optimum_fitness(&self) -> f64 {
        self.local_optima.iter().map(|o| o.fitness).sum::<f64>() / self.optima_count() as f64
    }
}

/// Local optima, global optimum and steepest-ascent basins.
pub fn census(landscape: &Landscape) -> Result<LandscapeCensus> {
    let n = landscape.n();
    check_limit(n, CENSUS_LIMIT)?;
    let fitness: Vec<f64> = enumerate(landscape)?.into_iter().map(|(_, f)| f).collect();
    // Locus i lives at bit n-1-i of the index.
    let flips: Vec<usize> = (0..n).map(|i| 1usize << (n - 1 - i)).collect();

    // Steepest-ascent successor, or the point itself at a local optimum.
    let successor: Vec<usize> = (0..fitness.len())
        .map(|x| {
            let mut best = x;
            for &m in &flips {
                if fitness[x ^ m] > fitness[best] {
                    best = x ^ m;
                }
            }
            best
        })
        .collect();

    let mut attractor = vec![usize::MAX; fitness.len()];
    let mut path = Vec::new();
    for start in 0..fitness.len() {
        let mut x = start;
        while attractor[x] == usize::MAX && successor[x] != x {
            path.push(x);
            x = successor[x];
        }
        let end = if successor[x] == x { x } else { attractor[x] };
        attractor[x] = end;
        for p in path.drain(..) {
            attractor[p] = end;
        }
    }

    let mut basin = vec![0u64; fitness.len()];
    for &a in &attractor {
        basin[a] += 1;
    }

    let local_optima: Vec<LocalOptimum> = (0..fitness.len())
        .filter(|&x| successor[x] == x)
        .map(|x| {
            Ok(LocalOptimum {
                genotype: Genotype::from_index(x as u64, n)?,
                fitness: fitness[x],
                basin_size: basin[x],
            })
        })
        .collect::<Result<_>>()?;

    let global_optimum = *local_optima
        .iter()
        .fold(None::<&LocalOptimum>, |best, o| match best {
            Some(b) if b.fitness >= o.fitness => Some(b),
            _ => Some(o),
        })
        .expect("every finite landscape has a maximum");

    Ok(LandscapeCensus {
        global_optimum,
        local_optima,
    })
}

/// Statistics over the censuses of many independently drawn landscapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub mean_optima_count: f64,
    pub optima_count_stderr: f64,
    pub mean_local_optimum_fitness: f64,
    pub local_optimum_fitness_stderr: f64,
    pub mean_global_optimum_fitness: f64,
    /// Mean share of the design space draining into the global optimum.
    pub mean_global_basin_fraction: f64,
}

/// Draws `samples` landscapes in sequence from `rng` and censuses each.
pub fn census_study<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    weights: &WeightVector,
    pattern: EpistasisPattern,
    samples: usize,
    rng: &mut R,
) -> Result<CensusSummary> {
    check_limit(n, CENSUS_LIMIT)?;
    if samples == 0 {
        return Err(Error::invalid("at least one landscape sample is required"));
    }
    let mut count = RunningStats::default();
    let mut local = RunningStats::default();
    let mut global = RunningStats::default();
    let mut basin = RunningStats::default();
    let space = (1u64 << n) as f64;
    for _ in 0..samples {
        let landscape = Landscape::random(n, k, pattern, weights.clone(), rng)?;
        let c = census(&landscape)?;
        count.push(c.optima_count() as f64);
        local.push(c.mean_local_optimum_fitness());
        global.push(c.global_optimum.fitness);
        basin.push(c.global_optimum.basin_size as f64 / space);
    }
    Ok(CensusSummary {
        n,
        k,
        samples,
        mean_optima_count: count.mean(),
        optima_count_stderr: count.stderr(),
        mean_local_optimum_fitness: local.mean(),
        local_optimum_fitness_stderr: local.stderr(),
        mean_global_optimum_fitness: global.mean(),
        mean_global_basin_fraction: basin.mean(),
    })
}

/// Mean over fresh landscapes of each landscape's average local-optimum
/// fitness, with its standard error.
pub fn mean_local_optimum_fitness<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    weights: &WeightVector,
    pattern: EpistasisPattern,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let s = census_study(n, k, weights, pattern, samples, rng)?;
    Ok((s.mean_local_optimum_fitness, s.local_optimum_fitness_stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{EpistasisMap, FitnessTable};
    use crate::rng::stream_from_seed;

    fn random(n: usize, k: usize, seed: u64) -> Landscape {
        Landscape::random(
            n,
            k,
            EpistasisPattern::Random,
            WeightVector::equal(n).unwrap(),
            &mut stream_from_seed(seed),
        )
        .unwrap()
    }

    #[test]
    fn enumerate_small() {
        let l = random(3, 1, 0);
        let all = enumerate(&l).unwrap();
        let names: Vec<String> = all.iter().map(|(g, _)| g.to_string()).collect();
        assert_eq!(
            names,
            ["000", "001", "010", "011", "100", "101", "110", "111"]
        );
        let residual: f64 = all.iter().map(|(g, f)| f - l.evaluate(g).unwrap()).sum();
        assert_eq!(residual, 0.0);
        assert_eq!(enumerate(&random(1, 0, 1)).unwrap().len(), 2);
    }

    #[test]
    fn size_guards() {
        let big = Landscape::new(
            EpistasisMap::from_partners(vec![vec![]; 25]).unwrap(),
            FitnessTable::from_tables(0, vec![vec![0.1, 0.2]; 25]).unwrap(),
            WeightVector::equal(25).unwrap(),
        )
        .unwrap();
        assert_eq!(
            enumerate(&big),
            Err(Error::Intractable { n: 25, limit: 24 })
        );
        assert!(matches!(census(&big), Err(Error::Intractable { .. })));
        let mut rng = stream_from_seed(0);
        assert!(census_study(
            21,
            0,
            &WeightVector::equal(21).unwrap(),
            EpistasisPattern::Random,
            1,
            &mut rng
        )
        .is_err());
        assert!(census_study(
            3,
            0,
            &WeightVector::equal(3).unwrap(),
            EpistasisPattern::Random,
            0,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn k0_has_one_optimum_draining_everything() {
        for seed in 0..200 {
            let n = 1 + (seed as usize % 10);
            let c = census(&random(n, 0, seed)).unwrap();
            assert_eq!(c.optima_count(), 1);
            assert_eq!(c.global_optimum.basin_size, 1 << n);
        }
    }

    #[test]
    fn census_invariants() {
        for seed in 0..200 {
            let n = 2 + (seed as usize % 9);
            let k = (seed as usize / 9) % n;
            let l = random(n, k, seed);
            let c = census(&l).unwrap();
            assert!(c.contains(&c.global_optimum.genotype));
            assert_eq!(
                c.local_optima.iter().map(|o| o.basin_size).sum::<u64>(),
                1 << n
            );
            let best = enumerate(&l)
                .unwrap()
                .into_iter()
                .map(|(_, f)| f)
                .fold(f64::MIN, f64::max);
            assert_eq!(c.global_optimum.fitness, best);
            let max_local = c
                .local_optima
                .iter()
                .map(|o| o.fitness)
                .fold(f64::MIN, f64::max);
            assert_eq!(max_local, c.global_optimum.fitness);
            for o in &c.local_optima {
                assert!(o.basin_size >= 1);
                assert!(o
                    .genotype
                    .neighbors()
                    .iter()
                    .all(|y| l.evaluate(y).unwrap() <= o.fitness));
            }
        }
    }

    #[test]
    fn basins_on_a_hand_built_landscape() {
        // n = 2, K = 1 with F(00)=0.9, F(01)=0.1, F(10)=0.2, F(11)=0.8:
        // locus 0 row = (x0 x1), locus 1 row = (x1 x0).
        let tables =
            FitnessTable::from_tables(1, vec![vec![0.9, 0.1, 0.2, 0.8], vec![0.9, 0.2, 0.1, 0.8]])
                .unwrap();
        let epi = EpistasisMap::from_partners(vec![vec![1], vec![0]]).unwrap();
        let l = Landscape::new(epi, tables, WeightVector::equal(2).unwrap()).unwrap();
        let c = census(&l).unwrap();
        let optima: Vec<(String, u64)> = c
            .local_optima
            .iter()
            .map(|o| (o.genotype.to_string(), o.basin_size))
            .collect();
        // 01 and 10 both see 00 (0.9) and 11 (0.8); steepest ascent picks 00.
        assert_eq!(optima, vec![("00".to_string(), 3), ("11".to_string(), 1)]);
        assert_eq!(c.global_optimum.genotype.to_string(), "00");
    }
}
