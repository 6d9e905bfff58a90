//! Satisfiability checking, seeded random configurations, and exhaustive
//! enumeration on top of the CDCL solver.

mod solver;

use thiserror::Error;

use crate::flatten::{lift, BooleanModel, CnfFormula, LiftError};
use crate::fm::Configuration;

pub use solver::{SolveResult, Solver, SolverStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("the model has no valid configuration")]
    Unsat,
    #[error("solver gave up after {0} conflicts")]
    Budget(u64),
    #[error("more than {0} configurations")]
    Overflow(usize),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

pub fn is_satisfiable(cnf: &CnfFormula) -> bool {
    matches!(Solver::new(cnf, 0).solve(), SolveResult::Sat(_))
}

/// Draws seeded random configurations of one flattened model.
pub struct Sampler<'a> {
    bm: &'a BooleanModel,
    cnf: &'a CnfFormula,
    max_conflicts: Option<u64>,
}

impl<'a> Sampler<'a> {
    pub fn new(bm: &'a BooleanModel, cnf: &'a CnfFormula) -> Self {
        Sampler { bm, cnf, max_conflicts: None }
    }

    pub fn with_conflict_budget(mut self, max_conflicts: u64) -> Self {
        self.max_conflicts = Some(max_conflicts);
        self
    }

    /// Full assignment (provenance variables first) for `seed`.
    pub fn assignment(&self, seed: u64) -> Result<Vec<bool>, SampleError> {
        let mut s = Solver::new(self.cnf, seed);
        match s.solve_limited(&[], self.max_conflicts) {
            SolveResult::Sat(m) => Ok(m),
            SolveResult::Unsat => Err(SampleError::Unsat),
            SolveResult::Unknown => Err(SampleError::Budget(self.max_conflicts.unwrap_or(0))),
        }
    }

    pub fn sample(&self, seed: u64) -> Result<Configuration, SampleError> {
        let a = self.assignment(seed)?;
        Ok(lift(self.bm, &a)?)
    }
}

pub fn random_config(bm: &BooleanModel, cnf: &CnfFormula, seed: u64) -> Result<Configuration, SampleError> {
    Sampler::new(bm, cnf).sample(seed)
}

/// Every configuration of the flattened model, or [`SampleError::Overflow`]
/// if there are more than `limit`. Blocking clauses range over provenance
/// variables only; auxiliaries are determined by them, so each configuration
/// appears exactly once.
pub fn enumerate_all(bm: &BooleanModel, cnf: &CnfFormula, limit: usize) -> Result<Vec<Configuration>, SampleError> {
    let mut s = Solver::new(cnf, 0);
    let mut out = Vec::new();
    while let SolveResult::Sat(m) = s.solve() {
        if out.len() == limit {
            return Err(SampleError::Overflow(limit));
        }
        out.push(lift(bm, &m)?);
        s.block(&m, cnf.provenance_vars);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatten::{flatten, to_cnf, FlattenBounds};
    use crate::fm::{check_configuration, parse_fm};

    const MODEL: &str = "root R {
        optional O { attr k in {1, 3}; }
        Block [1..3] { mandatory Kind { alternative { X { } Y { } } } }
      }
      constraints { O requires Block#2; Block#3/Kind/X -> !O(k=1); }";

    #[test]
    fn samples_are_valid_and_seed_dependent() {
        let m = parse_fm(MODEL).unwrap();
        let bm = flatten(&m, &FlattenBounds::declared()).unwrap();
        let cnf = to_cnf(&bm);
        let sampler = Sampler::new(&bm, &cnf);
        let mut distinct = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let c = sampler.sample(seed).unwrap();
            assert!(check_configuration(&m, &c).unwrap().is_valid());
            assert_eq!(sampler.sample(seed).unwrap(), c);
            distinct.insert(c);
        }
        assert!(distinct.len() > 5, "only {} distinct samples", distinct.len());
    }

    #[test]
    fn enumeration_count() {
        let m = parse_fm(MODEL).unwrap();
        let bm = flatten(&m, &FlattenBounds::declared()).unwrap();
        let cnf = to_cnf(&bm);
        let all = enumerate_all(&bm, &cnf, 1000).unwrap();
        // without O: 2 + 4 + 8; with O (2 values): (4 + 8) each, minus X at #3 with k=1 (4)
        assert_eq!(all.len(), 14 + 24 - 4);
        assert_eq!(enumerate_all(&bm, &cnf, 34).unwrap().len(), 34);
        assert_eq!(enumerate_all(&bm, &cnf, 33), Err(SampleError::Overflow(33)));
    }

    #[test]
    fn unsat_model() {
        let m = parse_fm("root R { mandatory A { } mandatory B { } } constraints { A excludes B; }").unwrap();
        let bm = flatten(&m, &FlattenBounds::declared()).unwrap();
        let cnf = to_cnf(&bm);
        assert!(!is_satisfiable(&cnf));
        assert_eq!(random_config(&bm, &cnf, 1), Err(SampleError::Unsat));
    }
}
