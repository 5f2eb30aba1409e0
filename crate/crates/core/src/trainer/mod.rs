//! REINFORCE training of the branching policy.

mod checkpoint;
mod episode;
mod optim;
mod train;

pub use checkpoint::{Checkpoint, Counters, MetricsRow, MetricsWriter};
pub use episode::{run_episode, Step, Trajectory};
pub use optim::{AdamState, Optimizer};
pub use train::{train, Trainer, UpdateStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::StepError;
use crate::neural::NeuralError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub gamma: f64,
    pub step_penalty: f64,
    pub solve_reward: f64,
    /// Length an unfinished episode is charged as.
    pub unfinished_equivalent_steps: usize,
    pub episode_cap: usize,
    pub min_batch_timesteps: usize,
    pub grad_clip_norm: f64,
    pub lr_initial: f64,
    pub lr_final: f64,
    /// Env steps after which `lr_final` applies.
    pub lr_switch_steps: u64,
    pub episodes_per_formula: usize,
    #[serde(default)]
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            step_penalty: 1e-4,
            solve_reward: 1.0,
            unfinished_equivalent_steps: 10_000,
            episode_cap: 400,
            min_batch_timesteps: 1200,
            grad_clip_norm: 2.0,
            lr_initial: 6e-4,
            lr_final: 1e-4,
            lr_switch_steps: 2_000_000,
            episodes_per_formula: 8,
            optimizer: Optimizer::Sgd,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let positive = self.step_penalty > 0.0
            && self.solve_reward > 0.0
            && self.episode_cap > 0
            && self.unfinished_equivalent_steps >= self.episode_cap
            && self.min_batch_timesteps > 0
            && self.grad_clip_norm > 0.0
            && self.lr_initial > 0.0
            && self.lr_final > 0.0
            && self.episodes_per_formula > 0;
        if !positive || !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(TrainError::Config(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn learning_rate(&self, env_steps: u64) -> f64 {
        if env_steps < self.lr_switch_steps {
            self.lr_initial
        } else {
            self.lr_final
        }
    }

    /// Extra reward charged to the last step of an unfinished episode.
    pub fn unfinished_penalty(&self) -> f64 {
        -self.step_penalty * (self.unfinished_equivalent_steps - self.episode_cap) as f64
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("every formula in the dataset is solved without a decision")]
    NoDecisions,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("non-finite gradient at update {update} (env step {env_steps}): {detail}")]
    NonFiniteGradient {
        update: u64,
        env_steps: u64,
        detail: String,
    },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// `G_t = Σ_{k≥t} γ^{k−t} r_k`, accumulated with a compensation term so long runs of small
/// penalties do not drift (400 steps of −1e-4 plus the terminal charge sum to exactly −1).
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (t, &r) in rewards.iter().enumerate().rev() {
        let scaled = gamma * hi;
        let mul_err = gamma.mul_add(hi, -scaled);
        // Knuth two-sum.
        let sum = r + scaled;
        let bv = sum - r;
        let add_err = (r - (sum - bv)) + (scaled - bv);
        let carry = gamma * lo + mul_err + add_err;
        hi = sum + carry;
        lo = carry - (hi - sum);
        out[t] = hi;
    }
    out
}

/// Per-step return weights, charging unfinished episodes the remaining penalty on their last step.
pub fn returns(traj: &Trajectory, cfg: &TrainConfig) -> Vec<f64> {
    let mut rewards: Vec<f64> = traj.steps.iter().map(|s| s.reward).collect();
    if !traj.completed {
        if let Some(last) = rewards.last_mut() {
            *last += cfg.unfinished_penalty();
        }
    }
    discounted_returns(&rewards, cfg.gamma)
}

/// Subtracts the mean and divides by (population std + 1e-8), in place.
pub fn whiten(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for v in values.iter_mut() {
        *v = (*v - mean) / (std + 1e-8);
    }
}
