use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{Heuristic, HeuristicError};
use crate::engine::Solver;
use crate::featurize::Featurizer;
use crate::formula::Lit;
use crate::neural::{policy_probs, PolicyParams};
use crate::rng::{seeded, SeededRng};

/// How the learned policy turns probabilities into an action.
#[derive(Clone, Debug)]
pub enum PolicyMode {
    /// Most probable legal literal, lowest index on ties.
    Greedy,
    /// Draw from the action distribution.
    Sample(u64),
}

/// Branching by the graph neural network policy.
pub struct PolicyHeuristic {
    params: Arc<PolicyParams>,
    featurizer: Featurizer,
    rng: Option<SeededRng>,
}

impl PolicyHeuristic {
    pub fn new(params: Arc<PolicyParams>, mode: PolicyMode) -> PolicyHeuristic {
        let rng = match mode {
            PolicyMode::Greedy => None,
            PolicyMode::Sample(seed) => Some(seeded(seed)),
        };
        PolicyHeuristic {
            params,
            featurizer: Featurizer::new(),
            rng,
        }
    }

    pub fn params(&self) -> &Arc<PolicyParams> {
        &self.params
    }
}

/// Index of the largest probability; the first one on ties.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Draws an index with probability proportional to `probs`.
pub fn sample_index(probs: &[f64], rng: &mut SeededRng) -> usize {
    WeightedIndex::new(probs)
        .expect("probabilities are finite, non-negative and not all zero")
        .sample(rng)
}

impl Heuristic for PolicyHeuristic {
    fn name(&self) -> &str {
        "learned"
    }

    fn start(&mut self, _solver: &Solver) {
        self.featurizer = Featurizer::new();
    }

    fn select(&mut self, solver: &Solver) -> Result<Lit, HeuristicError> {
        let obs = self.featurizer.observe(solver);
        if obs.num_legal() == 0 {
            return Err(HeuristicError::EmptyMask);
        }
        let probs =
            policy_probs(&obs, &self.params).map_err(|e| HeuristicError::Policy(e.to_string()))?;
        let index = match &mut self.rng {
            None => argmax(&probs),
            Some(rng) => sample_index(&probs, rng),
        };
        Ok(Lit::from_index(index))
    }
}
