use serde::{Deserialize, Serialize};

use crate::neural::PolicyParams;

/// How a clipped ascent direction becomes a parameter step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// `θ += lr · g`. The step norm is at most `lr · grad_clip_norm`.
    #[default]
    Sgd,
    /// Adam with β = (0.9, 0.999), ε = 1e-8, applied to the clipped gradient.
    Adam,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// First and second moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: PolicyParams,
    pub v: PolicyParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(like: &PolicyParams) -> AdamState {
        AdamState {
            m: like.zeros_like(),
            v: like.zeros_like(),
            t: 0,
        }
    }

    /// Ascends `params` along `grad` and returns the norm of the applied step.
    pub fn step(&mut self, params: &mut PolicyParams, grad: &PolicyParams, lr: f64) -> f64 {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        let mut sq = 0.0;
        let blocks = params
            .blocks_mut()
            .zip(self.m.blocks_mut())
            .zip(self.v.blocks_mut())
            .zip(grad.blocks());
        for ((((_, mut p), (_, mut m)), (_, mut v)), (_, g)) in blocks {
            ndarray::Zip::from(&mut p)
                .and(&mut m)
                .and(&mut v)
                .and(&g)
                .for_each(|p, m, v, &g| {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let d = lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                    *p += d;
                    sq += d * d;
                });
        }
        sq.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Hyper;

    #[test]
    fn first_adam_step_is_normalized() {
        let mut p = PolicyParams::init(1, Hyper::default());
        let before = p.clone();
        let mut g = PolicyParams::init(2, Hyper::default());
        g.scale(0.37);
        let mut st = AdamState::new(&p);
        st.step(&mut p, &g, 1e-3);
        for (((_, a), (_, b)), (_, gb)) in p.blocks().zip(before.blocks()).zip(g.blocks()) {
            for ((x, y), gv) in a.iter().zip(b.iter()).zip(gb.iter()) {
                let expect = 1e-3 * gv / (gv.abs() + ADAM_EPS);
                assert!((x - y - expect).abs() < 1e-12, "{x} {y} {gv}");
            }
        }
    }
}
