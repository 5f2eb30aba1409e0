//! Graph neural network policy over the literal–clause graph, with exact gradients.
//!
//! Encoder, per round `t` (weights shared across rounds, `l_0 = 0`):
//!
//! ```text
//! c_t = relu(Σ_{l∈c} [v_l, l_{t-1}, l̄_{t-1}] · W_L + B_L)
//! l_t = relu(Σ_{c∋l} [label_c, c_t] · W_C + B_C)
//! ```
//!
//! Policy: every literal is scored independently by a three-layer perceptron over
//! `[v_l, l_τ, l̄_τ, g]` where `g` is the scaled global solver state, followed by a softmax over
//! the legal literals.

mod backward;
mod forward;
mod io;

pub use backward::{accumulate_grad_logprob, grad_logprob};
pub use forward::{encode, masked_softmax, policy_probs, policy_scores, Forward};
pub use io::{load_params, read_params, save_params, write_params, FORMAT_VERSION, MAGIC};

use ndarray::{Array1, Array2};
use rand::Rng;
use thiserror::Error;

use crate::featurize::{CLAUSE_LABELS, GLOBAL_FEATURES, LITERAL_LABELS};
use crate::rng::seeded;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("empty action mask")]
    EmptyMask,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a weight file of a supported format (magic {magic:?}, version {version})")]
    Format { magic: [u8; 4], version: u32 },
    #[error("weight file truncated")]
    Truncated,
    #[error("weight file has {0} unexpected trailing bytes")]
    Trailing(usize),
    #[error("weight file contains a non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid hyperparameters: {0}")]
    Hyper(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hyper {
    /// Literal embedding width.
    pub delta_l: usize,
    /// Clause embedding width.
    pub delta_c: usize,
    /// Message-passing rounds.
    pub tau: usize,
    pub h1: usize,
    pub h2: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            delta_l: 16,
            delta_c: 64,
            tau: 1,
            h1: 64,
            h2: 32,
        }
    }
}

impl Hyper {
    /// Width of the policy network input.
    pub fn policy_input(&self) -> usize {
        LITERAL_LABELS + 2 * self.delta_l + GLOBAL_FEATURES
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.delta_l == 0 || self.delta_c == 0 || self.h1 == 0 || self.h2 == 0 {
            return Err(NeuralError::Hyper(format!("{self:?}: widths must be positive")));
        }
        Ok(())
    }
}

/// Affine standardization of the global solver state: `(x - offset) / divisor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureScaling {
    pub offset: [f64; GLOBAL_FEATURES],
    pub divisor: [f64; GLOBAL_FEATURES],
}

impl Default for FeatureScaling {
    fn default() -> Self {
        FeatureScaling {
            offset: [0.0; GLOBAL_FEATURES],
            divisor: [64.0, 16.0, 16.0, 256.0, 1.0],
        }
    }
}

impl FeatureScaling {
    pub fn apply(&self, raw: &[f64; GLOBAL_FEATURES]) -> [f64; GLOBAL_FEATURES] {
        std::array::from_fn(|i| (raw[i] - self.offset[i]) / self.divisor[i])
    }
}

/// Trainable parameters. Also used as the gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams {
    pub hyper: Hyper,
    pub scaling: FeatureScaling,
    pub w_l: Array2<f64>,
    pub b_l: Array1<f64>,
    pub w_c: Array2<f64>,
    pub b_c: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub w3: Array2<f64>,
    pub b3: Array1<f64>,
}

/// Block names in file and iteration order.
pub const BLOCK_NAMES: [&str; 10] = ["W_L", "B_L", "W_C", "B_C", "W1", "b1", "W2", "b2", "W3", "b3"];

impl PolicyParams {
    pub fn zeros(hyper: Hyper) -> PolicyParams {
        let h = hyper;
        PolicyParams {
            hyper,
            scaling: FeatureScaling::default(),
            w_l: Array2::zeros((LITERAL_LABELS + 2 * h.delta_l, h.delta_c)),
            b_l: Array1::zeros(h.delta_c),
            w_c: Array2::zeros((h.delta_c + CLAUSE_LABELS, h.delta_l)),
            b_c: Array1::zeros(h.delta_l),
            w1: Array2::zeros((h.policy_input(), h.h1)),
            b1: Array1::zeros(h.h1),
            w2: Array2::zeros((h.h1, h.h2)),
            b2: Array1::zeros(h.h2),
            w3: Array2::zeros((h.h2, 1)),
            b3: Array1::zeros(1),
        }
    }

    /// Glorot-uniform weights, zero biases. Deterministic in `seed`.
    pub fn init(seed: u64, hyper: Hyper) -> PolicyParams {
        let mut p = PolicyParams::zeros(hyper);
        let mut rng = seeded(seed);
        for (_, mut block) in p.blocks_mut() {
            if block.ndim() == 1 {
                continue;
            }
            let (fan_in, fan_out) = (block.shape()[0], block.shape()[1]);
            let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for x in block.iter_mut() {
                *x = rng.random_range(-s..=s);
            }
        }
        p
    }

    pub fn num_params(&self) -> usize {
        self.blocks().map(|(_, b)| b.len()).sum()
    }

    /// `(name, block)` pairs in file order, viewed dynamically.
    pub fn blocks(&self) -> impl Iterator<Item = (&'static str, ndarray::ArrayViewD<'_, f64>)> {
        [
            self.w_l.view().into_dyn(),
            self.b_l.view().into_dyn(),
            self.w_c.view().into_dyn(),
            self.b_c.view().into_dyn(),
            self.w1.view().into_dyn(),
            self.b1.view().into_dyn(),
            self.w2.view().into_dyn(),
            self.b2.view().into_dyn(),
            self.w3.view().into_dyn(),
            self.b3.view().into_dyn(),
        ]
        .into_iter()
        .enumerate()
        .map(|(i, b)| (BLOCK_NAMES[i], b))
    }

    pub fn blocks_mut(
        &mut self,
    ) -> impl Iterator<Item = (&'static str, ndarray::ArrayViewMutD<'_, f64>)> {
        [
            self.w_l.view_mut().into_dyn(),
            self.b_l.view_mut().into_dyn(),
            self.w_c.view_mut().into_dyn(),
            self.b_c.view_mut().into_dyn(),
            self.w1.view_mut().into_dyn(),
            self.b1.view_mut().into_dyn(),
            self.w2.view_mut().into_dyn(),
            self.b2.view_mut().into_dyn(),
            self.w3.view_mut().into_dyn(),
            self.b3.view_mut().into_dyn(),
        ]
        .into_iter()
        .enumerate()
        .map(|(i, b)| (BLOCK_NAMES[i], b))
    }

    /// A zero-valued container congruent to `self`.
    pub fn zeros_like(&self) -> PolicyParams {
        let mut z = PolicyParams::zeros(self.hyper);
        z.scaling = self.scaling;
        z
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &PolicyParams) {
        for ((_, mut a), (_, b)) in self.blocks_mut().zip(other.blocks()) {
            a.scaled_add(alpha, &b);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for (_, mut b) in self.blocks_mut() {
            b.mapv_inplace(|x| x * alpha);
        }
    }

    /// Euclidean norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks()
            .map(|(_, b)| b.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().all(|(_, b)| b.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests;
