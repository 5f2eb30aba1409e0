use std::sync::Arc;

use super::{TrainConfig, TrainError};
use crate::env::QbfEnv;
use crate::featurize::Observation;
use crate::formula::{Lit, QbfFormula};
use crate::heuristics::sample_index;
use crate::neural::{policy_probs, PolicyParams};
use crate::rng::seeded;

#[derive(Clone, Debug)]
pub struct Step {
    pub observation: Observation,
    pub action: Lit,
    pub reward: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// The last step ended the search with a verdict.
    pub completed: bool,
    pub formula_id: usize,
    pub seed: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Solves `formula` once with actions sampled from the policy. Deterministic in `(params, seed)`.
pub fn run_episode(
    formula: Arc<QbfFormula>,
    formula_id: usize,
    params: &PolicyParams,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<Trajectory, TrainError> {
    let mut rng = seeded(seed);
    let mut env = QbfEnv::default();
    let mut result = env.reset(formula);
    let mut steps: Vec<Step> = Vec::new();
    while let Some(observation) = result.observation.take() {
        if steps.len() == cfg.episode_cap {
            break;
        }
        let probs = policy_probs(&observation, params)?;
        let action = Lit::from_index(sample_index(&probs, &mut rng));
        result = env.step(action)?;
        steps.push(Step {
            observation,
            action,
            reward: -cfg.step_penalty,
        });
    }
    let completed = result.is_terminal();
    if completed {
        if let Some(last) = steps.last_mut() {
            last.reward += cfg.solve_reward;
        }
    }
    Ok(Trajectory {
        steps,
        completed,
        formula_id,
        seed,
    })
}
