//! Diversity-maximizing sampling: a population of random configurations is
//! improved by swapping in fresh candidates for the member that contributes
//! least to the sum of pairwise distances.

use rayon::prelude::*;
use thiserror::Error;

use crate::flatten::{BooleanModel, CnfFormula, LiftError};
use crate::fm::Configuration;
use crate::sat::{SampleError, Sampler};

/// Minimum fitness gain for a swap to count as an improvement.
const EPSILON: f64 = 1e-12;
/// Candidates generated per parallel batch.
const BATCH: u64 = 64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Metric {
    /// `1 - |A ∩ B| / |A ∪ B|` over selected variables.
    #[default]
    Jaccard,
    /// Differing variables divided by the number of model variables.
    Hamming,
}

/// The true provenance variables of one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlatSelection {
    model: u64,
    num_vars: usize,
    vars: Vec<usize>,
}

impl FlatSelection {
    pub fn new(bm: &BooleanModel, config: &Configuration) -> Result<Self, LiftError> {
        Ok(FlatSelection { model: bm.fingerprint(), num_vars: bm.len(), vars: bm.selection(config)? })
    }

    /// Builds a selection from raw variable ids of a model identified by `model`.
    pub fn from_vars(model: u64, num_vars: usize, mut vars: Vec<usize>) -> Self {
        vars.sort_unstable();
        vars.dedup();
        FlatSelection { model, num_vars, vars }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiversityError {
    #[error("selections come from different flattened models")]
    MismatchedModels,
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn distance(a: &FlatSelection, b: &FlatSelection, metric: Metric) -> Result<f64, DiversityError> {
    if a.model != b.model || a.num_vars != b.num_vars {
        return Err(DiversityError::MismatchedModels);
    }
    Ok(raw_distance(a, b, metric))
}

fn raw_distance(a: &FlatSelection, b: &FlatSelection, metric: Metric) -> f64 {
    let common = intersection_size(&a.vars, &b.vars);
    let union = a.vars.len() + b.vars.len() - common;
    match metric {
        Metric::Jaccard if union == 0 => 0.0,
        Metric::Jaccard => 1.0 - common as f64 / union as f64,
        Metric::Hamming if a.num_vars == 0 => 0.0,
        Metric::Hamming => (union - common) as f64 / a.num_vars as f64,
    }
}

/// Sum of distances over unordered pairs.
pub fn fitness(sample: &[FlatSelection], metric: Metric) -> Result<f64, DiversityError> {
    let mut total = 0.0;
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            total += distance(&sample[i], &sample[j], metric)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityOptions {
    pub n: usize,
    pub iterations: u64,
    pub seed: u64,
    pub metric: Metric,
    /// Generate candidates on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl DiversityOptions {
    pub fn new(n: usize, iterations: u64, seed: u64) -> Self {
        DiversityOptions { n, iterations, seed, metric: Metric::Jaccard, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub configurations: Vec<Configuration>,
    /// Recomputed from scratch on the final members.
    pub fitness: f64,
    pub initial_fitness: f64,
    pub seed: u64,
    pub iterations: u64,
    pub metric: Metric,
    /// Fitness right after each accepted swap, in order.
    pub accepted: Vec<f64>,
    pub distances: DistanceSummary,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Solver seed for member `index` of stream `stream` (0 = initial
/// population, 1 = per-iteration candidates).
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix(splitmix(seed ^ splitmix(stream)).wrapping_add(index))
}

struct Drawn {
    config: Configuration,
    sel: FlatSelection,
}

fn draw(sampler: &Sampler<'_>, bm: &BooleanModel, seed: u64) -> Result<Drawn, DiversityError> {
    let config = sampler.sample(seed)?;
    let sel = FlatSelection::new(bm, &config)?;
    Ok(Drawn { config, sel })
}

fn draw_many(
    sampler: &Sampler<'_>,
    bm: &BooleanModel,
    seeds: Vec<u64>,
    parallel: bool,
) -> Result<Vec<Drawn>, DiversityError> {
    if parallel {
        seeds.into_par_iter().map(|s| draw(sampler, bm, s)).collect()
    } else {
        seeds.into_iter().map(|s| draw(sampler, bm, s)).collect()
    }
}

pub fn sample_diverse(bm: &BooleanModel, cnf: &CnfFormula, opts: &DiversityOptions) -> Result<Sample, DiversityError> {
    if opts.n == 0 {
        return Err(DiversityError::EmptySample);
    }
    let metric = opts.metric;
    let sampler = Sampler::new(bm, cnf);
    let initial_seeds = (0..opts.n as u64).map(|i| derive_seed(opts.seed, 0, i)).collect();
    let mut members = draw_many(&sampler, bm, initial_seeds, opts.parallel)?;

    let n = members.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = raw_distance(&members[i].sel, &members[j].sel, metric);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut contrib: Vec<f64> = dist.iter().map(|row| row.iter().sum()).collect();
    let mut current: f64 = contrib.iter().sum::<f64>() / 2.0;
    let initial_fitness = current;
    let mut accepted = Vec::new();

    let mut next = 0u64;
    while n > 1 && next < opts.iterations {
        let end = (next + BATCH).min(opts.iterations);
        let seeds = (next..end).map(|t| derive_seed(opts.seed, 1, t)).collect();
        let candidates = draw_many(&sampler, bm, seeds, opts.parallel)?;
        next = end;
        for cand in candidates {
            let mut least = 0;
            for i in 1..n {
                if contrib[i] < contrib[least] {
                    least = i;
                }
            }
            let row: Vec<f64> = (0..n)
                .map(|j| if j == least { 0.0 } else { raw_distance(&cand.sel, &members[j].sel, metric) })
                .collect();
            let gain: f64 = row.iter().sum();
            let proposed = current - contrib[least] + gain;
            if proposed - current <= EPSILON {
                continue;
            }
            for j in 0..n {
                if j != least {
                    contrib[j] += row[j] - dist[least][j];
                    dist[least][j] = row[j];
                    dist[j][least] = row[j];
                }
            }
            contrib[least] = gain;
            members[least] = cand;
            current = proposed;
            accepted.push(current);
        }
    }

    let sels: Vec<FlatSelection> = members.iter().map(|m| m.sel.clone()).collect();
    let fitness = fitness(&sels, metric)?;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(raw_distance(&sels[i], &sels[j], metric));
        }
    }
    let distances = if pairs.is_empty() {
        DistanceSummary { min: 0.0, mean: 0.0, max: 0.0 }
    } else {
        DistanceSummary {
            min: pairs.iter().copied().fold(f64::INFINITY, f64::min),
            mean: pairs.iter().sum::<f64>() / pairs.len() as f64,
            max: pairs.iter().copied().fold(0.0, f64::max),
        }
    };
    Ok(Sample {
        configurations: members.into_iter().map(|m| m.config).collect(),
        fitness,
        initial_fitness,
        seed: opts.seed,
        iterations: opts.iterations,
        metric,
        accepted,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(vars: &[usize]) -> FlatSelection {
        FlatSelection::from_vars(7, 10, vars.to_vec())
    }

    #[test]
    fn jaccard_values() {
        let d = distance(&sel(&[0, 1]), &sel(&[1, 2]), Metric::Jaccard).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(distance(&sel(&[0, 1]), &sel(&[0, 1]), Metric::Jaccard).unwrap(), 0.0);
        assert_eq!(distance(&sel(&[0]), &sel(&[1]), Metric::Jaccard).unwrap(), 1.0);
        assert_eq!(distance(&sel(&[]), &sel(&[]), Metric::Jaccard).unwrap(), 0.0);
    }

    #[test]
    fn hamming_is_normalized() {
        let d = distance(&sel(&[0, 1]), &sel(&[1, 2]), Metric::Hamming).unwrap();
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn mismatched_models() {
        let other = FlatSelection::from_vars(8, 10, vec![0]);
        assert_eq!(distance(&sel(&[0]), &other, Metric::Jaccard), Err(DiversityError::MismatchedModels));
    }

    #[test]
    fn fitness_values() {
        assert_eq!(fitness(&[sel(&[1])], Metric::Jaccard).unwrap(), 0.0);
        assert_eq!(fitness(&[sel(&[1]), sel(&[1])], Metric::Jaccard).unwrap(), 0.0);
        assert_eq!(fitness(&[sel(&[1]), sel(&[2]), sel(&[3])], Metric::Jaccard).unwrap(), 3.0);
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(1, 1, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
    }
}
