use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{
    returns, run_episode, whiten, AdamState, Checkpoint, Counters, Optimizer, TrainConfig,
    TrainError, Trajectory,
};
use crate::featurize::Observation;
use crate::formula::{Lit, QbfFormula};
use crate::neural::{accumulate_grad_logprob, Hyper, PolicyParams};
use crate::rng::{derive_seed, seeded};

const INIT_STREAM: u64 = 0x1A17;
const ORDER_STREAM: u64 = 0x0DE5;
const EPISODE_STREAM: u64 = 0xE915;

/// Steps per gradient partial sum. Fixed so the summation order, and therefore the result, does
/// not depend on the number of worker threads.
const GRAD_CHUNK: usize = 64;

/// Summary of one parameter update.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateStats {
    pub update: u64,
    /// Cumulative, after this update.
    pub env_steps: u64,
    pub batch_steps: usize,
    pub episodes: usize,
    /// Mean `G_0` over the batch's episodes.
    pub mean_return: f64,
    pub solve_rate: f64,
    pub mean_decisions: f64,
    /// Before clipping.
    pub grad_norm: f64,
    pub clipped_norm: f64,
    /// Norm of the parameter change.
    pub step_norm: f64,
    pub learning_rate: f64,
}

pub struct Trainer {
    dataset: Vec<Arc<QbfFormula>>,
    cfg: TrainConfig,
    seed: u64,
    params: PolicyParams,
    counters: Counters,
    adam: Option<AdamState>,
    order: Vec<usize>,
}

impl Trainer {
    /// Starts from freshly initialized parameters derived from `seed`.
    pub fn new(
        dataset: Vec<Arc<QbfFormula>>,
        cfg: TrainConfig,
        hyper: Hyper,
        seed: u64,
    ) -> Result<Trainer, TrainError> {
        hyper.validate()?;
        let params = PolicyParams::init(derive_seed(seed, INIT_STREAM), hyper);
        Trainer::with_state(dataset, cfg, seed, params, Counters::default(), None)
    }

    pub fn resume(
        dataset: Vec<Arc<QbfFormula>>,
        cfg: TrainConfig,
        checkpoint: Checkpoint,
    ) -> Result<Trainer, TrainError> {
        let Checkpoint {
            params,
            counters,
            seed,
            adam,
        } = checkpoint;
        Trainer::with_state(dataset, cfg, seed, params, counters, adam)
    }

    fn with_state(
        dataset: Vec<Arc<QbfFormula>>,
        cfg: TrainConfig,
        seed: u64,
        params: PolicyParams,
        counters: Counters,
        adam: Option<AdamState>,
    ) -> Result<Trainer, TrainError> {
        if dataset.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        cfg.validate()?;
        let adam = match cfg.optimizer {
            Optimizer::Sgd => None,
            Optimizer::Adam => Some(adam.unwrap_or_else(|| AdamState::new(&params))),
        };
        let mut t = Trainer {
            dataset,
            cfg,
            seed,
            params,
            counters,
            adam,
            order: Vec::new(),
        };
        t.order = t.epoch_order(t.counters.epoch);
        Ok(t)
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn into_params(self) -> PolicyParams {
        self.params
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            params: self.params.clone(),
            counters: self.counters.clone(),
            seed: self.seed,
            adam: self.adam.clone(),
        }
    }

    fn epoch_order(&self, epoch: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dataset.len()).collect();
        let mut rng = seeded(derive_seed(derive_seed(self.seed, ORDER_STREAM), epoch));
        order.shuffle(&mut rng);
        order
    }

    fn next_formula(&mut self) -> usize {
        if self.counters.position == self.order.len() {
            self.counters.epoch += 1;
            self.counters.position = 0;
            self.order = self.epoch_order(self.counters.epoch);
        }
        let id = self.order[self.counters.position];
        self.counters.position += 1;
        id
    }

    /// Collects episodes until the batch holds `min_batch_timesteps` decisions.
    fn collect(&mut self) -> Result<Vec<Trajectory>, TrainError> {
        let mut batch = Vec::new();
        let mut steps = 0;
        let mut empty_run = 0;
        while steps < self.cfg.min_batch_timesteps {
            let id = self.next_formula();
            let first = self.counters.episodes;
            self.counters.episodes += self.cfg.episodes_per_formula as u64;
            let episode_stream = derive_seed(self.seed, EPISODE_STREAM);
            let formula = &self.dataset[id];
            let (params, cfg) = (&self.params, &self.cfg);
            let trajectories: Vec<Trajectory> = (0..cfg.episodes_per_formula as u64)
                .into_par_iter()
                .map(|k| {
                    let seed = derive_seed(episode_stream, first + k);
                    run_episode(formula.clone(), id, params, cfg, seed)
                })
                .collect::<Result<_, _>>()?;
            let n: usize = trajectories.iter().map(Trajectory::len).sum();
            if n == 0 {
                empty_run += 1;
                if empty_run > self.dataset.len() {
                    return Err(TrainError::NoDecisions);
                }
            } else {
                empty_run = 0;
            }
            steps += n;
            batch.extend(trajectories.into_iter().filter(|t| !t.is_empty()));
        }
        Ok(batch)
    }

    /// One REINFORCE update: collect a batch, whiten its returns, clip and ascend.
    pub fn update(&mut self) -> Result<UpdateStats, TrainError> {
        let batch = self.collect()?;
        let per_episode: Vec<Vec<f64>> = batch.iter().map(|t| returns(t, &self.cfg)).collect();
        let episodes = batch.len();
        let mean_return = per_episode.iter().map(|g| g[0]).sum::<f64>() / episodes as f64;
        let solve_rate = batch.iter().filter(|t| t.completed).count() as f64 / episodes as f64;

        let mut weights: Vec<f64> = per_episode.into_iter().flatten().collect();
        whiten(&mut weights);
        let samples: Vec<(&Observation, Lit, f64)> = batch
            .iter()
            .flat_map(|t| t.steps.iter())
            .zip(&weights)
            .map(|(s, &w)| (&s.observation, s.action, w))
            .collect();
        let batch_steps = samples.len();

        let mut grad = self.batch_gradient(&samples)?;
        let grad_norm = grad.norm();
        if !grad_norm.is_finite() {
            let detail = grad
                .blocks()
                .filter(|(_, b)| b.iter().any(|x| !x.is_finite()))
                .map(|(name, _)| name)
                .collect::<Vec<_>>()
                .join(",");
            return Err(TrainError::NonFiniteGradient {
                update: self.counters.updates,
                env_steps: self.counters.env_steps,
                detail: format!("blocks [{detail}], batch of {batch_steps} steps"),
            });
        }
        if grad_norm > self.cfg.grad_clip_norm {
            grad.scale(self.cfg.grad_clip_norm / grad_norm);
        }
        let clipped_norm = grad.norm();
        let lr = self.cfg.learning_rate(self.counters.env_steps);
        let step_norm = match &mut self.adam {
            Some(adam) => adam.step(&mut self.params, &grad, lr),
            None => {
                self.params.add_scaled(lr, &grad);
                lr * clipped_norm
            }
        };

        self.counters.env_steps += batch_steps as u64;
        self.counters.updates += 1;
        let stats = UpdateStats {
            update: self.counters.updates,
            env_steps: self.counters.env_steps,
            batch_steps,
            episodes,
            mean_return,
            solve_rate,
            mean_decisions: batch_steps as f64 / episodes as f64,
            grad_norm,
            clipped_norm,
            step_norm,
            learning_rate: lr,
        };
        log::debug!("{stats:?}");
        Ok(stats)
    }

    fn batch_gradient(
        &self,
        samples: &[(&Observation, Lit, f64)],
    ) -> Result<PolicyParams, TrainError> {
        let params = &self.params;
        let partials: Vec<PolicyParams> = samples
            .par_chunks(GRAD_CHUNK)
            .map(|chunk| {
                let mut g = params.zeros_like();
                for &(obs, action, w) in chunk {
                    accumulate_grad_logprob(obs, action, w, params, &mut g)?;
                }
                Ok(g)
            })
            .collect::<Result<_, TrainError>>()?;
        let mut grad = params.zeros_like();
        for g in &partials {
            grad.add_scaled(1.0, g);
        }
        Ok(grad)
    }

    /// Updates until at least `max_env_steps` cumulative env steps, calling `on_update` after each.
    pub fn run(
        &mut self,
        max_env_steps: u64,
        mut on_update: impl FnMut(&UpdateStats, &Trainer) -> Result<(), TrainError>,
    ) -> Result<(), TrainError> {
        while self.counters.env_steps < max_env_steps {
            let stats = self.update()?;
            on_update(&stats, self)?;
        }
        Ok(())
    }
}

/// Trains from scratch for `max_env_steps` and returns the parameters with the learning curve.
pub fn train(
    dataset: Vec<Arc<QbfFormula>>,
    cfg: TrainConfig,
    hyper: Hyper,
    seed: u64,
    max_env_steps: u64,
) -> Result<(PolicyParams, Vec<UpdateStats>), TrainError> {
    let mut trainer = Trainer::new(dataset, cfg, hyper, seed)?;
    let mut curve = Vec::new();
    trainer.run(max_env_steps, |s, _| {
        curve.push(s.clone());
        Ok(())
    })?;
    Ok((trainer.into_params(), curve))
}
