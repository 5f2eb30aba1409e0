use ndarray::{s, Array1, Array2, Axis};

use super::{NeuralError, PolicyParams};
use crate::featurize::{Observation, AdjacencyStructure, GLOBAL_FEATURES, LITERAL_LABELS};

/// Activations of one message-passing round, kept for backpropagation.
#[derive(Clone, Debug)]
pub(super) struct Round {
    /// `[v_l, l_{t-1}, l̄_{t-1}]` per literal.
    pub lit_in: Array2<f64>,
    pub pre_c: Array2<f64>,
    /// `[label_c, c_t]` per clause.
    pub clause_in: Array2<f64>,
    pub pre_l: Array2<f64>,
}

/// A full forward pass over one observation.
#[derive(Clone, Debug)]
pub struct Forward {
    pub(super) rounds: Vec<Round>,
    /// Final literal embeddings `l_τ`.
    pub literal: Array2<f64>,
    pub(super) policy_in: Array2<f64>,
    pub(super) z1: Array2<f64>,
    pub(super) a1: Array2<f64>,
    pub(super) z2: Array2<f64>,
    pub(super) a2: Array2<f64>,
    pub scores: Array1<f64>,
}

fn check(obs: &Observation, p: &PolicyParams) -> Result<(), NeuralError> {
    let lits = obs.adjacency.num_literals();
    let clauses = obs.adjacency.num_clauses();
    if obs.literal_labels.len() != lits || obs.mask.len() != lits {
        return Err(NeuralError::Shape(format!(
            "{} label rows and {} mask entries for {lits} literals",
            obs.literal_labels.len(),
            obs.mask.len()
        )));
    }
    if obs.clause_labels.len() != clauses {
        return Err(NeuralError::Shape(format!(
            "{} clause labels for {clauses} clauses",
            obs.clause_labels.len()
        )));
    }
    let h = p.hyper;
    if p.w_l.dim() != (LITERAL_LABELS + 2 * h.delta_l, h.delta_c) || p.w1.dim().0 != h.policy_input() {
        return Err(NeuralError::Shape("parameters do not match their hyperparameters".into()));
    }
    Ok(())
}

fn labels(obs: &Observation) -> Array2<f64> {
    let mut v = Array2::zeros((obs.literal_labels.len(), LITERAL_LABELS));
    for (i, row) in obs.literal_labels.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            v[[i, j]] = x;
        }
    }
    v
}

/// `[v_l, x_l, x_l̄]` for every literal `l`.
fn with_complements(v: &Array2<f64>, x: &Array2<f64>) -> Array2<f64> {
    let (n2, d) = x.dim();
    let mut out = Array2::zeros((n2, LITERAL_LABELS + 2 * d));
    out.slice_mut(s![.., ..LITERAL_LABELS]).assign(v);
    out.slice_mut(s![.., LITERAL_LABELS..LITERAL_LABELS + d]).assign(x);
    for l in 0..n2 {
        out.slice_mut(s![l, LITERAL_LABELS + d..]).assign(&x.row(l ^ 1));
    }
    out
}

/// `out[c] += Σ_{l∈c} src[l]`.
pub(super) fn gather(adj: &AdjacencyStructure, src: &Array2<f64>, out: &mut Array2<f64>) {
    for (c, row) in adj.clauses().enumerate() {
        let mut acc = out.row_mut(c);
        for &l in row {
            acc += &src.row(l as usize);
        }
    }
}

/// `out[l] += Σ_{c∋l} src[c]`, accumulating clauses in ascending order.
pub(super) fn scatter(adj: &AdjacencyStructure, src: &Array2<f64>, out: &mut Array2<f64>) {
    for (c, row) in adj.clauses().enumerate() {
        let msg = src.row(c);
        for &l in row {
            let mut acc = out.row_mut(l as usize);
            acc += &msg;
        }
    }
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

impl Forward {
    pub fn run(obs: &Observation, p: &PolicyParams) -> Result<Forward, NeuralError> {
        check(obs, p)?;
        let h = p.hyper;
        let adj = &obs.adjacency;
        let (n2, m) = (adj.num_literals(), adj.num_clauses());
        let v = labels(obs);

        let mut literal = Array2::zeros((n2, h.delta_l));
        let mut rounds = Vec::with_capacity(h.tau);
        for _ in 0..h.tau {
            let lit_in = with_complements(&v, &literal);
            let msg = lit_in.dot(&p.w_l);
            let mut pre_c = Array2::zeros((m, h.delta_c));
            gather(adj, &msg, &mut pre_c);
            pre_c += &p.b_l;
            let c = relu(&pre_c);

            let mut clause_in = Array2::zeros((m, 1 + h.delta_c));
            for (i, &label) in obs.clause_labels.iter().enumerate() {
                clause_in[[i, 0]] = label;
            }
            clause_in.slice_mut(s![.., 1..]).assign(&c);
            let msg = clause_in.dot(&p.w_c);
            let mut pre_l = Array2::zeros((n2, h.delta_l));
            scatter(adj, &msg, &mut pre_l);
            pre_l += &p.b_c;
            literal = relu(&pre_l);
            rounds.push(Round {
                lit_in,
                pre_c,
                clause_in,
                pre_l,
            });
        }

        let g = p.scaling.apply(&obs.global_state);
        let mut policy_in = Array2::zeros((n2, h.policy_input()));
        let width = LITERAL_LABELS + 2 * h.delta_l;
        policy_in.slice_mut(s![.., ..width]).assign(&with_complements(&v, &literal));
        for l in 0..n2 {
            for (j, &x) in g.iter().enumerate() {
                policy_in[[l, width + j]] = x;
            }
        }
        debug_assert_eq!(width + GLOBAL_FEATURES, h.policy_input());
        let z1 = policy_in.dot(&p.w1) + &p.b1;
        let a1 = relu(&z1);
        let z2 = a1.dot(&p.w2) + &p.b2;
        let a2 = relu(&z2);
        let scores = (a2.dot(&p.w3) + &p.b3).index_axis_move(Axis(1), 0);
        Ok(Forward {
            rounds,
            literal,
            policy_in,
            z1,
            a1,
            z2,
            a2,
            scores,
        })
    }
}

/// Final literal embeddings, `2n × δL`. All zeros when `τ = 0`.
pub fn encode(obs: &Observation, p: &PolicyParams) -> Result<Array2<f64>, NeuralError> {
    Forward::run(obs, p).map(|f| f.literal)
}

/// One score per literal (legal or not).
pub fn policy_scores(obs: &Observation, p: &PolicyParams) -> Result<Array1<f64>, NeuralError> {
    Forward::run(obs, p).map(|f| f.scores)
}

/// Softmax over the legal entries; illegal entries get probability 0.
pub fn masked_softmax(scores: &[f64], mask: &[bool]) -> Result<Vec<f64>, NeuralError> {
    assert_eq!(scores.len(), mask.len());
    let max = scores
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&s, _)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(NeuralError::EmptyMask);
    }
    let mut probs: Vec<f64> = scores
        .iter()
        .zip(mask)
        .map(|(&s, &m)| if m { (s - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Action distribution for an observation.
pub fn policy_probs(obs: &Observation, p: &PolicyParams) -> Result<Vec<f64>, NeuralError> {
    let scores = policy_scores(obs, p)?;
    masked_softmax(scores.as_slice().expect("contiguous"), &obs.mask)
}
