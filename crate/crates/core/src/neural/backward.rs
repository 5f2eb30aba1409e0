//! Reverse-mode gradient of `weight · log π(action | observation)`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, Axis};

use super::forward::{gather, scatter};
use super::{masked_softmax, Forward, NeuralError, PolicyParams};
use crate::featurize::{Observation, LITERAL_LABELS};
use crate::formula::Lit;

/// Gradient of `weight · log π(action | obs)` with respect to every parameter.
pub fn grad_logprob(
    obs: &Observation,
    action: Lit,
    weight: f64,
    p: &PolicyParams,
) -> Result<PolicyParams, NeuralError> {
    let mut grad = p.zeros_like();
    accumulate_grad_logprob(obs, action, weight, p, &mut grad)?;
    Ok(grad)
}

/// Adds the gradient of `weight · log π(action | obs)` to `grad` and returns `log π(action)`.
pub fn accumulate_grad_logprob(
    obs: &Observation,
    action: Lit,
    weight: f64,
    p: &PolicyParams,
    grad: &mut PolicyParams,
) -> Result<f64, NeuralError> {
    let fwd = Forward::run(obs, p)?;
    let probs = masked_softmax(fwd.scores.as_slice().expect("contiguous"), &obs.mask)?;
    let a = action.index();
    if a >= probs.len() || !obs.mask[a] {
        return Err(NeuralError::Shape(format!("action {action} is not legal")));
    }
    let logprob = probs[a].ln();
    if weight == 0.0 {
        return Ok(logprob);
    }
    let h = p.hyper;
    let adj = &obs.adjacency;
    let n2 = probs.len();

    // d/ds_l of log softmax at the chosen action.
    let mut ds = Array2::zeros((n2, 1));
    for l in 0..n2 {
        if obs.mask[l] {
            ds[[l, 0]] = weight * (f64::from(u8::from(l == a)) - probs[l]);
        }
    }
    general_mat_mul(1.0, &fwd.a2.t(), &ds, 1.0, &mut grad.w3);
    grad.b3 += &ds.sum_axis(Axis(0));
    let mut dz2 = ds.dot(&p.w3.t());
    relu_backward(&mut dz2, &fwd.z2);
    general_mat_mul(1.0, &fwd.a1.t(), &dz2, 1.0, &mut grad.w2);
    grad.b2 += &dz2.sum_axis(Axis(0));
    let mut dz1 = dz2.dot(&p.w2.t());
    relu_backward(&mut dz1, &fwd.z1);
    general_mat_mul(1.0, &fwd.policy_in.t(), &dz1, 1.0, &mut grad.w1);
    grad.b1 += &dz1.sum_axis(Axis(0));
    let d_policy_in = dz1.dot(&p.w1.t());

    let mut d_literal = split_complements(&d_policy_in, h.delta_l);
    for round in fwd.rounds.iter().rev() {
        let mut d_pre_l = d_literal;
        relu_backward(&mut d_pre_l, &round.pre_l);
        grad.b_c += &d_pre_l.sum_axis(Axis(0));
        let mut d_msg_c = Array2::zeros((adj.num_clauses(), h.delta_l));
        gather(adj, &d_pre_l, &mut d_msg_c);
        general_mat_mul(1.0, &round.clause_in.t(), &d_msg_c, 1.0, &mut grad.w_c);
        let d_clause_in = d_msg_c.dot(&p.w_c.t());

        let mut d_pre_c = d_clause_in.slice(s![.., 1..]).to_owned();
        relu_backward(&mut d_pre_c, &round.pre_c);
        grad.b_l += &d_pre_c.sum_axis(Axis(0));
        let mut d_msg_l = Array2::zeros((n2, h.delta_c));
        scatter(adj, &d_pre_c, &mut d_msg_l);
        general_mat_mul(1.0, &round.lit_in.t(), &d_msg_l, 1.0, &mut grad.w_l);
        let d_lit_in = d_msg_l.dot(&p.w_l.t());
        d_literal = split_complements(&d_lit_in, h.delta_l);
    }
    Ok(logprob)
}

fn relu_backward(grad: &mut Array2<f64>, pre: &Array2<f64>) {
    grad.zip_mut_with(pre, |g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
}

/// Gradient with respect to the literal embeddings, given the gradient with respect to rows laid
/// out as `[v_l, x_l, x_l̄, ...]`.
fn split_complements(d_in: &Array2<f64>, delta_l: usize) -> Array2<f64> {
    let n2 = d_in.nrows();
    let own = d_in.slice(s![.., LITERAL_LABELS..LITERAL_LABELS + delta_l]);
    let other = d_in.slice(s![.., LITERAL_LABELS + delta_l..LITERAL_LABELS + 2 * delta_l]);
    let mut d = own.to_owned();
    for l in 0..n2 {
        let mut row = d.row_mut(l ^ 1);
        row += &other.row(l);
    }
    d
}
