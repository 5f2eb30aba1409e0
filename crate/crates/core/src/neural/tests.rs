use std::sync::Arc;

use ndarray::Array1;
use rand::Rng;

use super::*;
use crate::featurize::{AdjacencyStructure, Observation};
use crate::formula::Lit;
use crate::rng::seeded;

fn example_observation() -> Observation {
    // (x ∨ y) ∧ (¬x ∨ y), x universal, y existential, at reset.
    let adjacency = Arc::new(AdjacencyStructure::from_clauses(2, &[vec![0, 2], vec![1, 2]]));
    let x = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let y = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    Observation {
        adjacency,
        literal_labels: vec![x, x, y, y],
        clause_labels: vec![0.0, 0.0],
        global_state: [0.0, 0.0, 0.0, 100.0, 0.0],
        mask: vec![true, true, false, false],
    }
}

/// Random small observation with binary labels and a non-empty mask.
fn random_observation(seed: u64) -> Observation {
    let mut rng = seeded(seed);
    let n = rng.random_range(1..=4usize);
    let m = rng.random_range(1..=5usize);
    let clauses: Vec<Vec<u32>> = (0..m)
        .map(|_| {
            let mut vars: Vec<usize> = (0..n).collect();
            let k = rng.random_range(1..=n.min(3));
            let mut lits = Vec::new();
            for _ in 0..k {
                let v = vars.swap_remove(rng.random_range(0..vars.len()));
                lits.push((2 * v + usize::from(rng.random::<bool>())) as u32);
            }
            lits
        })
        .collect();
    let adjacency = Arc::new(AdjacencyStructure::from_clauses(n, &clauses));
    let mut literal_labels = Vec::new();
    for _ in 0..n {
        let row: [f64; 7] = std::array::from_fn(|_| f64::from(u8::from(rng.random::<bool>())));
        literal_labels.push(row);
        literal_labels.push(row);
    }
    let mut mask: Vec<bool> = (0..2 * n).map(|_| rng.random()).collect();
    let forced = rng.random_range(0..2 * n);
    mask[forced] = true;
    Observation {
        adjacency,
        literal_labels,
        clause_labels: (0..m).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect(),
        global_state: std::array::from_fn(|_| rng.random_range(0.0..50.0)),
        mask,
    }
}

fn small_hyper() -> Hyper {
    Hyper {
        delta_l: 3,
        delta_c: 5,
        tau: 2,
        h1: 6,
        h2: 4,
    }
}

/// Parameters with random biases too, so no pre-activation sits exactly on a ReLU kink.
fn random_params(seed: u64, hyper: Hyper) -> PolicyParams {
    let mut p = PolicyParams::init(seed, hyper);
    let mut rng = seeded(seed ^ 0xABCD);
    for (_, mut b) in p.blocks_mut() {
        if b.ndim() == 1 {
            b.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
    }
    p
}

fn objective(obs: &Observation, action: Lit, weight: f64, p: &PolicyParams) -> f64 {
    let probs = policy_probs(obs, p).unwrap();
    weight * probs[action.index()].ln()
}

fn nudge(p: &mut PolicyParams, block: usize, index: usize, delta: f64) {
    let (_, mut target) = p.blocks_mut().nth(block).unwrap();
    *target.iter_mut().nth(index).unwrap() += delta;
}

#[test]
fn init_is_deterministic_and_bounded() {
    let h = Hyper::default();
    let a = PolicyParams::init(5, h);
    assert_eq!(a, PolicyParams::init(5, h));
    assert_ne!(a, PolicyParams::init(6, h));
    for (name, block) in a.blocks() {
        if block.ndim() == 1 {
            assert!(block.iter().all(|&x| x == 0.0), "{name}");
        } else {
            let s = (6.0 / (block.shape()[0] + block.shape()[1]) as f64).sqrt();
            assert!(block.iter().all(|x| x.abs() <= s), "{name}");
        }
    }
    assert_eq!(a.w1.nrows(), 44);
}

#[test]
fn zero_parameters_give_zero_embeddings_and_scores() {
    let p = PolicyParams::zeros(Hyper::default());
    let obs = example_observation();
    let l = encode(&obs, &p).unwrap();
    assert_eq!(l.dim(), (4, 16));
    assert!(l.iter().all(|&x| x == 0.0));
    assert!(policy_scores(&obs, &p).unwrap().iter().all(|&x| x == 0.0));
}

#[test]
fn constant_clause_embeddings() {
    let mut p = PolicyParams::zeros(Hyper::default());
    p.b_l = Array1::from_iter((0..64).map(|i| f64::from(i % 5) * 0.25));
    let obs = example_observation();
    let fwd = Forward::run(&obs, &p).unwrap();
    let pre_c = &fwd.rounds[0].pre_c;
    for c in 0..2 {
        for j in 0..64 {
            assert_eq!(pre_c[[c, j]].max(0.0), p.b_l[j]);
        }
    }
    assert!(fwd.literal.iter().all(|&x| x == 0.0));
}

#[test]
fn example_embedding_shape_and_clause_order() {
    let p = random_params(9, Hyper::default());
    let obs = example_observation();
    let a = encode(&obs, &p).unwrap();
    assert_eq!(a.dim(), (4, 16));
    let mut swapped = obs.clone();
    swapped.adjacency = Arc::new(AdjacencyStructure::from_clauses(2, &[vec![1, 2], vec![0, 2]]));
    let b = encode(&swapped, &p).unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        assert!((x - y).abs() <= 1e-6 * x.abs().max(y.abs()).max(1e-12));
    }
}

#[test]
fn zero_rounds_ignore_the_graph() {
    let h = Hyper {
        tau: 0,
        ..Hyper::default()
    };
    let p = random_params(3, h);
    let obs = example_observation();
    assert!(encode(&obs, &p).unwrap().iter().all(|&x| x == 0.0));
    let mut other = obs.clone();
    other.adjacency = Arc::new(AdjacencyStructure::from_clauses(2, &[vec![0, 1, 3]]));
    other.clause_labels = vec![1.0];
    assert_eq!(policy_scores(&obs, &p).unwrap(), policy_scores(&other, &p).unwrap());
}

#[test]
fn symmetric_variables_score_equally() {
    // ∃ a b: (a ∨ b) ∧ (¬a ∨ ¬b) is symmetric under a ↔ b.
    let adjacency = Arc::new(AdjacencyStructure::from_clauses(2, &[vec![0, 2], vec![1, 3]]));
    let e = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let obs = Observation {
        adjacency,
        literal_labels: vec![e; 4],
        clause_labels: vec![0.0, 0.0],
        global_state: [0.0, 0.0, 0.0, 100.0, 0.0],
        mask: vec![true; 4],
    };
    let s = policy_scores(&obs, &random_params(1, Hyper::default())).unwrap();
    assert_eq!(s[0], s[2]);
    assert_eq!(s[1], s[3]);
}

#[test]
fn masked_softmax_cases() {
    assert_eq!(masked_softmax(&[3.0, 3.0], &[true, true]).unwrap(), vec![0.5, 0.5]);
    assert_eq!(masked_softmax(&[3.0, -9.0, 1.0], &[false, true, false]).unwrap(), vec![0.0, 1.0, 0.0]);
    let p = masked_softmax(&[0.0, 2f64.ln(), 7.0], &[true, true, false]).unwrap();
    assert!((p[0] - 1.0 / 3.0).abs() < 1e-15);
    assert!((p[1] - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(p[2], 0.0);
    assert!(matches!(masked_softmax(&[1.0], &[false]), Err(NeuralError::EmptyMask)));
    let big = masked_softmax(&[1000.0, 999.0, -1000.0], &[true, true, true]).unwrap();
    assert!((big.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_weight_and_forced_action_have_zero_gradient() {
    let p = random_params(4, Hyper::default());
    let obs = example_observation();
    let x = Lit::from_index(0);
    assert_eq!(grad_logprob(&obs, x, 0.0, &p).unwrap().norm(), 0.0);
    let mut forced = obs.clone();
    forced.mask = vec![true, false, false, false];
    assert_eq!(grad_logprob(&forced, x, 1.7, &p).unwrap().norm(), 0.0);
}

#[test]
fn illegal_action_is_rejected() {
    let p = random_params(4, Hyper::default());
    assert!(grad_logprob(&example_observation(), Lit::from_index(2), 1.0, &p).is_err());
}

#[test]
fn gradient_matches_finite_differences() {
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let obs = random_observation(seed);
        let p = random_params(seed + 100, small_hyper());
        let legal: Vec<usize> = (0..obs.mask.len()).filter(|&l| obs.mask[l]).collect();
        let action = Lit::from_index(legal[seed as usize % legal.len()]);
        let weight = 0.5 + seed as f64 * 0.1;
        let analytic = grad_logprob(&obs, action, weight, &p).unwrap();
        let mut probe = p.clone();
        for (b, (_, block)) in analytic.blocks().enumerate() {
            for (i, &a) in block.iter().enumerate() {
                nudge(&mut probe, b, i, eps);
                let up = objective(&obs, action, weight, &probe);
                nudge(&mut probe, b, i, -2.0 * eps);
                let down = objective(&obs, action, weight, &probe);
                nudge(&mut probe, b, i, eps);
                let numeric = (up - down) / (2.0 * eps);
                // Exact zeros (e.g. shifts common to every score) only see rounding noise.
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-5);
                worst = worst.max(rel);
            }
        }
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn accumulation_is_additive() {
    let p = random_params(8, small_hyper());
    let obs = random_observation(3);
    let a = Lit::from_index(obs.mask.iter().position(|&m| m).unwrap());
    let mut acc = p.zeros_like();
    accumulate_grad_logprob(&obs, a, 0.3, &p, &mut acc).unwrap();
    accumulate_grad_logprob(&obs, a, 0.7, &p, &mut acc).unwrap();
    let once = grad_logprob(&obs, a, 1.0, &p).unwrap();
    let mut diff = acc.clone();
    diff.add_scaled(-1.0, &once);
    assert!(diff.norm() <= 1e-12 * once.norm().max(1.0));
}

#[test]
fn weight_file_round_trip_is_bit_exact() {
    let mut p = random_params(12, Hyper::default());
    p.scaling.divisor[0] = 32.0;
    let mut bytes = Vec::new();
    write_params(&p, &mut bytes).unwrap();
    assert_eq!(&bytes[..4], b"QBRN");
    assert_eq!(bytes.len(), 120 + 8 * p.num_params());
    let q = read_params(bytes.as_slice()).unwrap();
    assert_eq!(p, q);
    for ((_, a), (_, b)) in p.blocks().zip(q.blocks()) {
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn weight_file_rejections() {
    let p = random_params(12, small_hyper());
    let mut bytes = Vec::new();
    write_params(&p, &mut bytes).unwrap();

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(read_params(bad_magic.as_slice()), Err(NeuralError::Format { .. })));

    let mut bad_version = bytes.clone();
    bad_version[4] = 2;
    assert!(matches!(
        read_params(bad_version.as_slice()),
        Err(NeuralError::Format { version: 2, .. })
    ));

    assert!(matches!(
        read_params(&bytes[..bytes.len() - 3]),
        Err(NeuralError::Truncated)
    ));

    let mut nan = bytes.clone();
    let at = nan.len() - 8;
    nan[at..].copy_from_slice(&f64::NAN.to_le_bytes());
    assert!(matches!(read_params(nan.as_slice()), Err(NeuralError::NonFinite("b3"))));

    let mut long = bytes.clone();
    long.push(0);
    assert!(matches!(read_params(long.as_slice()), Err(NeuralError::Trailing(1))));
}
