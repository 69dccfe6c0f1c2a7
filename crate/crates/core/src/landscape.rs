//! Genotypes, epistasis structure, random fitness tables and the weighted
//! NK fitness function.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::unit_uniform;

/// Genotypes are packed into a `u64`.
pub const MAX_LOCI: usize = 64;

/// Largest supported epistasis degree; each locus table holds `2^(K+1)` entries.
pub const MAX_K: usize = 20;

/// Path coefficients of the five IT-enabled dynamic capabilities
/// (sensing, learning, coordinating, integrating, reconfiguring).
pub const ITDC_BETAS: [f64; 5] = [0.226, 0.249, 0.212, 0.212, 0.245];

/// A point of the design space `{0,1}^N`.
///
/// Bit `i` is the state of locus `i`. The integer [`index`](Genotype::index)
/// reads the string left to right with locus 0 as the most significant bit,
/// so `"001"` has index 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype {
    code: u64,
    len: u8,
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || n > MAX_LOCI {
        return Err(Error::invalid(format!(
            "locus count must be in 1..={MAX_LOCI}, got {n}"
        )));
    }
    Ok(())
}

impl Genotype {
    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_index(0, n)
    }

    pub fn from_index(index: u64, n: usize) -> Result<Self> {
        check_len(n)?;
        if index & !mask(n) != 0 {
            return Err(Error::invalid(format!(
                "index {index} does not fit in {n} loci"
            )));
        }
        Ok(Genotype {
            code: index,
            len: n as u8,
        })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_len(bits.len())?;
        let mut code = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(Error::invalid(format!("allele must be 0 or 1, got {b}")));
            }
            code = (code << 1) | u64::from(b);
        }
        Ok(Genotype {
            code,
            len: bits.len() as u8,
        })
    }

    /// Uniform draw over all `2^n` strings from a single `next_u64`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_len(n)?;
        Ok(Genotype {
            code: rng.next_u64() & mask(n),
            len: n as u8,
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self) -> u64 {
        self.code
    }

    #[inline]
    pub fn bit(&self, locus: usize) -> u8 {
        debug_assert!(locus < self.len());
        ((self.code >> (self.len() - 1 - locus)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.bit(i)).collect()
    }

    #[inline]
    pub fn flipped(&self, locus: usize) -> Genotype {
        debug_assert!(locus < self.len());
        Genotype {
            code: self.code ^ (1u64 << (self.len() - 1 - locus)),
            len: self.len,
        }
    }

    /// Flips every listed locus. Repeated loci cancel.
    pub fn flipped_many(&self, loci: &[usize]) -> Genotype {
        loci.iter().fold(*self, |g, &l| g.flipped(l))
    }

    pub fn hamming_distance(&self, other: &Genotype) -> u32 {
        (self.code ^ other.code).count_ones()
    }

    /// All 1-mutant neighbors in ascending flipped-locus order.
    pub fn neighbors(&self) -> Vec<Genotype> {
        (0..self.len()).map(|i| self.flipped(i)).collect()
    }
}

pub fn neighbors(genotype: &Genotype) -> Vec<Genotype> {
    genotype.neighbors()
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genotype({self})")
    }
}

impl FromStr for Genotype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::invalid(format!("not a binary digit: {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Genotype::from_bits(&bits)
    }
}

impl Serialize for Genotype {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Genotype {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the K partners of each locus are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpistasisPattern {
    /// K distinct partners drawn uniformly from the other N - 1 loci.
    #[default]
    Random,
    /// The K cyclically following loci `(i+1) mod N, …, (i+K) mod N`.
    Adjacent,
}

impl EpistasisPattern {
    pub fn label(&self) -> &'static str {
        match self {
            EpistasisPattern::Random => "random",
            EpistasisPattern::Adjacent => "adjacent",
        }
    }
}

/// For each locus, the sorted list of the K loci its contribution depends on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpistasisMap {
    k: usize,
    partners: Vec<Vec<usize>>,
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    check_len(n)?;
    if k >= n {
        return Err(Error::invalid(format!(
            "epistasis degree k = {k} must be at most n - 1 = {}",
            n - 1
        )));
    }
    if k > MAX_K {
        return Err(Error::invalid(format!(
            "epistasis degree k = {k} exceeds the supported maximum {MAX_K}"
        )));
    }
    Ok(())
}

impl EpistasisMap {
    /// Random patterns consume `gen_range` draws locus by locus (partial
    /// Fisher-Yates over the other loci in ascending order); adjacent
    /// patterns consume nothing.
    pub fn build<R: Rng + ?Sized>(
        n: usize,
        k: usize,
        pattern: EpistasisPattern,
        rng: &mut R,
    ) -> Result<Self> {
        check_nk(n, k)?;
        let partners = (0..n)
            .map(|i| {
                let mut list: Vec<usize> = match pattern {
                    EpistasisPattern::Adjacent => (1..=k).map(|d| (i + d) % n).collect(),
                    EpistasisPattern::Random => {
                        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                        for j in 0..k {
                            let r = rng.gen_range(j..others.len());
                            others.swap(j, r);
                        }
                        others.truncate(k);
                        others
                    }
                };
                list.sort_unstable();
                list
            })
            .collect();
        Ok(EpistasisMap { k, partners })
    }

    /// Validates a hand-written map. Lists are sorted on the way in.
    pub fn from_partners(mut partners: Vec<Vec<usize>>) -> Result<Self> {
        let n = partners.len();
        let k = partners.first().map_or(0, Vec::len);
        check_nk(n, k)?;
        for (i, list) in partners.iter_mut().enumerate() {
            list.sort_unstable();
            if list.len() != k {
                return Err(Error::invalid(format!(
                    "locus {i} has {} partners, expected {k}",
                    list.len()
                )));
            }
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("locus {i} lists a partner twice")));
            }
            if let Some(&bad) = list.iter().find(|&&j| j == i || j >= n) {
                return Err(Error::invalid(format!(
                    "locus {i} has invalid partner {bad}"
                )));
            }
        }
        Ok(EpistasisMap { k, partners })
    }

    pub fn n(&self) -> usize {
        self.partners.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn partners(&self, locus: usize) -> &[usize] {
        &self.partners[locus]
    }

    /// Loci whose contribution changes when `locus` flips: itself and every
    /// locus that lists it as a partner.
    pub fn dependents(&self, locus: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| i == locus || self.partners[i].binary_search(&locus).is_ok())
            .collect()
    }
}

/// Row of locus `locus`'s table selected by `genotype`: the locus's own bit is
/// the most significant bit, followed by its partners' bits in ascending
/// locus order.
#[inline]
pub fn table_index(genotype: &Genotype, locus: usize, epistasis: &EpistasisMap) -> usize {
    epistasis.partners[locus]
        .iter()
        .fold(usize::from(genotype.bit(locus)), |row, &p| {
            (row << 1) | usize::from(genotype.bit(p))
        })
}

/// Per-locus contribution tables `f_i`, each with `2^(K+1)` entries in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessTable {
    k: usize,
    tables: Vec<Vec<f64>>,
}

impl FitnessTable {
    /// Draws entries locus-major, then by row index, one [`unit_uniform`] each.
    pub fn generate<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        check_nk(n, k)?;
        let rows = 1usize << (k + 1);
        let tables = (0..n)
            .map(|_| (0..rows).map(|_| unit_uniform(rng)).collect())
            .collect();
        Ok(FitnessTable { k, tables })
    }

    pub fn from_tables(k: usize, tables: Vec<Vec<f64>>) -> Result<Self> {
        check_nk(tables.len(), k)?;
        let rows = 1usize << (k + 1);
        for (i, t) in tables.iter().enumerate() {
            if t.len() != rows {
                return Err(Error::invalid(format!(
                    "table {i} has {} rows, expected {rows}",
                    t.len()
                )));
            }
            if let Some(v) = t.iter().find(|v| !(0.0..1.0).contains(*v)) {
                return Err(Error::invalid(format!(
                    "table {i} entry {v} is outside [0, 1)"
                )));
            }
        }
        Ok(FitnessTable { k, tables })
    }

    pub fn n(&self) -> usize {
        self.tables.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn total_entries(&self) -> usize {
        self.tables.iter().map(Vec::len).sum()
    }

    pub fn locus(&self, locus: usize) -> &[f64] {
        &self.tables[locus]
    }
}

/// Normalized locus weights `φ_i = β_i / Σ β`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    phi: Vec<f64>,
}

impl WeightVector {
    pub fn from_betas(betas: &[f64]) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::invalid("weight list is empty"));
        }
        if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::invalid(format!(
                "path weights must be positive and finite, got {b}"
            )));
        }
        let total: f64 = betas.iter().sum();
        Ok(WeightVector {
            phi: betas.iter().map(|b| b / total).collect(),
        })
    }

    /// `φ_i = 1/N`: Kauffman's unweighted mean.
    pub fn equal(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(WeightVector {
            phi: vec![1.0 / n as f64; n],
        })
    }

    pub fn itdc() -> Self {
        Self::from_betas(&ITDC_BETAS).expect("ITDC betas are positive")
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phi
    }
}

pub fn make_weight_vector(betas: &[f64]) -> Result<WeightVector> {
    WeightVector::from_betas(betas)
}

/// An immutable NK landscape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    epistasis: EpistasisMap,
    tables: FitnessTable,
    weights: WeightVector,
}

impl Landscape {
    pub fn new(
        epistasis: EpistasisMap,
        tables: FitnessTable,
        weights: WeightVector,
    ) -> Result<Self> {
        let n = epistasis.n();
        if tables.n() != n || weights.len() != n {
            return Err(Error::invalid(format!(
                "component sizes disagree: epistasis {n}, tables {}, weights {}",
                tables.n(),
                weights.len()
            )));
        }
        if tables.k() != epistasis.k() {
            return Err(Error::invalid(format!(
                "epistasis degree {} does not match table degree {}",
                epistasis.k(),
                tables.k()
            )));
        }
        Ok(Landscape {
            epistasis,
            tables,
            weights,
        })
    }

    /// Builds the epistasis map, then the tables, from one stream.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        k: usize,
        pattern: EpistasisPattern,
        weights: WeightVector,
        rng: &mut R,
    ) -> Result<Self> {
        if weights.len() != n {
            return Err(Error::invalid(format!(
                "{} weights supplied for {n} loci",
                weights.len()
            )));
        }
        let epistasis = EpistasisMap::build(n, k, pattern, rng)?;
        let tables = FitnessTable::generate(n, k, rng)?;
        Landscape::new(epistasis, tables, weights)
    }

    pub fn n(&self) -> usize {
        self.epistasis.n()
    }

    pub fn k(&self) -> usize {
        self.epistasis.k()
    }

    pub fn epistasis(&self) -> &EpistasisMap {
        &self.epistasis
    }

    pub fn tables(&self) -> &FitnessTable {
        &self.tables
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn check_genotype(&self, genotype: &Genotype) -> Result<()> {
        if genotype.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: genotype.len(),
            });
        }
        Ok(())
    }

    /// Unweighted per-locus contributions `f_i`.
    pub fn contributions(&self, genotype: &Genotype) -> Result<Vec<f64>> {
        self.check_genotype(genotype)?;
        Ok((0..self.n())
            .map(|i| self.tables.tables[i][table_index(genotype, i, &self.epistasis)])
            .collect())
    }

    /// `F(x) = Σ φ_i f_i`, summed in ascending locus order.
    pub fn evaluate(&self, genotype: &Genotype) -> Result<f64> {
        self.check_genotype(genotype)?;
        Ok(self.fitness(genotype))
    }

    /// [`evaluate`](Self::evaluate) for genotypes already known to fit.
    #[inline]
    pub(crate) fn fitness(&self, genotype: &Genotype) -> f64 {
        debug_assert_eq!(genotype.len(), self.n());
        self.weights
            .phi
            .iter()
            .zip(&self.tables.tables)
            .enumerate()
            .map(|(i, (w, t))| w * t[table_index(genotype, i, &self.epistasis)])
            .sum()
    }
}
