use rand::Rng;

use super::{Heuristic, HeuristicError};
use crate::engine::Solver;
use crate::formula::Lit;
use crate::rng::{seeded, SeededRng};

/// Uniform choice among the legal literals.
pub struct RandomHeuristic {
    rng: SeededRng,
}

impl RandomHeuristic {
    pub fn new(seed: u64) -> RandomHeuristic {
        RandomHeuristic { rng: seeded(seed) }
    }

    pub fn select_from(&mut self, mask: &[Lit]) -> Result<Lit, HeuristicError> {
        if mask.is_empty() {
            return Err(HeuristicError::EmptyMask);
        }
        Ok(mask[self.rng.random_range(0..mask.len())])
    }
}

impl Heuristic for RandomHeuristic {
    fn name(&self) -> &str {
        "random"
    }

    fn select(&mut self, solver: &Solver) -> Result<Lit, HeuristicError> {
        self.select_from(&solver.legal_actions())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Var;

    fn lits(n: u32) -> Vec<Lit> {
        (1..=n).map(|v| Var::new(v).positive()).collect()
    }

    #[test]
    fn single_literal_always_chosen() {
        let mut h = RandomHeuristic::new(3);
        let only = [Var::new(5).negative()];
        for _ in 0..100 {
            assert_eq!(h.select_from(&only).unwrap(), only[0]);
        }
    }

    #[test]
    fn empty_mask_is_an_error() {
        assert!(matches!(
            RandomHeuristic::new(0).select_from(&[]),
            Err(HeuristicError::EmptyMask)
        ));
    }

    #[test]
    fn frequencies_are_uniform() {
        let mask = lits(4);
        let mut h = RandomHeuristic::new(2024);
        let mut counts = [0u32; 4];
        let draws = 100_000;
        for _ in 0..draws {
            let l = h.select_from(&mask).unwrap();
            counts[l.var().index()] += 1;
        }
        for c in counts {
            let freq = f64::from(c) / f64::from(draws);
            assert!((freq - 0.25).abs() < 0.01, "frequency {freq}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_sequence() {
        let mask = lits(7);
        let run = |seed| {
            let mut h = RandomHeuristic::new(seed);
            (0..50).map(|_| h.select_from(&mask).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }
}
