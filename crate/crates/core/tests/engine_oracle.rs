use std::sync::Arc;

use proptest::prelude::*;
use qbrn::engine::{solve_with, Limits, RestartSchedule, Solver, SolverConfig, Verdict};
use qbrn::formula::{
    generate_boolean_family, oracle_truth, BooleanFamilyConfig, Clause, Lit, OracleCap, Origin,
    QbfFormula, Var,
};
use qbrn::heuristics::{Heuristic, RandomHeuristic, VsidsHeuristic};

fn expected(f: &QbfFormula) -> Verdict {
    if oracle_truth(f, OracleCap::default()).unwrap() {
        Verdict::True
    } else {
        Verdict::False
    }
}

fn run(f: &Arc<QbfFormula>, h: &mut dyn Heuristic, config: SolverConfig) -> Verdict {
    let out = solve_with(f.clone(), h, Limits::decisions(1_000_000), config).unwrap();
    assert_ne!(out.verdict, Verdict::Unknown);
    out.verdict
}

fn eager_restarts() -> SolverConfig {
    SolverConfig {
        restarts: RestartSchedule {
            first: 2,
            growth: 1.2,
            major_every: 3,
            enabled: true,
        },
        trace: false,
    }
}

fn no_restarts() -> SolverConfig {
    SolverConfig {
        restarts: RestartSchedule {
            enabled: false,
            ..RestartSchedule::default()
        },
        trace: false,
    }
}

#[test]
fn generated_family_matches_oracle() {
    let cfg = BooleanFamilyConfig::small();
    let mut by_verdict = [0; 2];
    for seed in 0..300 {
        let f = Arc::new(generate_boolean_family(seed, &cfg).unwrap());
        let want = expected(&f);
        by_verdict[usize::from(want == Verdict::True)] += 1;
        assert_eq!(run(&f, &mut VsidsHeuristic::new(), SolverConfig::default()), want, "seed {seed}");
        assert_eq!(run(&f, &mut RandomHeuristic::new(seed), SolverConfig::default()), want);
        assert_eq!(run(&f, &mut RandomHeuristic::new(seed), eager_restarts()), want);
        assert_eq!(run(&f, &mut VsidsHeuristic::new(), no_restarts()), want);
    }
    // Both verdicts occur, so the sweep exercises both kinds of termination.
    assert!(by_verdict[0] > 0 && by_verdict[1] > 0, "{by_verdict:?}");
}

/// Drives a solver with a random heuristic and returns the learned clauses seen along the way.
fn learned_clauses_of_run(f: &Arc<QbfFormula>, seed: u64) -> Vec<Clause> {
    let mut solver = Solver::new(f.clone(), eager_restarts());
    let mut h = RandomHeuristic::new(seed);
    let mut learned = Vec::new();
    while solver.status().truth().is_none() {
        let lit = h.select(&solver).unwrap();
        solver.decide(lit).unwrap();
        for c in solver.learned_clauses() {
            if !learned.contains(c) {
                learned.push(c.clone());
            }
        }
    }
    learned
}

#[test]
fn learned_clauses_preserve_truth() {
    let cfg = BooleanFamilyConfig::small();
    let mut runs = 0;
    for seed in 0..5000 {
        let f = Arc::new(generate_boolean_family(seed, &cfg).unwrap());
        let learned = learned_clauses_of_run(&f, seed);
        if learned.is_empty() {
            continue;
        }
        let truth = oracle_truth(&f, OracleCap::default()).unwrap();
        for c in learned {
            let mut clauses = f.clauses().to_vec();
            clauses.push(Clause::new(c.lits.clone(), Origin::Original));
            let extended = f.with_clauses(clauses).unwrap();
            assert_eq!(oracle_truth(&extended, OracleCap::default()).unwrap(), truth, "seed {seed}");
        }
        runs += 1;
        if runs == 100 {
            return;
        }
    }
    panic!("only {runs} runs learned a clause");
}

fn arbitrary_qbf() -> impl Strategy<Value = QbfFormula> {
    (1u32..=9)
        .prop_flat_map(|n| {
            let universal = proptest::collection::vec(any::<bool>(), n as usize);
            let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
            let clause = proptest::collection::vec(lit, 1..=4);
            (Just(n), universal, proptest::collection::vec(clause, 0..=24))
        })
        .prop_map(|(n, universal, clauses)| {
            let (mut a, mut e) = (Vec::new(), Vec::new());
            for (i, &u) in universal.iter().enumerate() {
                if u {
                    a.push(Var::from_index(i));
                } else {
                    e.push(Var::from_index(i));
                }
            }
            let clauses = clauses
                .iter()
                .filter_map(|c| {
                    let lits: Vec<Lit> = c.iter().map(|&d| Lit::from_dimacs(d).unwrap()).collect();
                    Clause::normalized(&lits, Origin::Original)
                })
                .collect();
            QbfFormula::new(n, a, e, clauses).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn arbitrary_formulas_match_oracle(f in arbitrary_qbf(), seed in any::<u64>()) {
        let want = expected(&f);
        let f = Arc::new(f);
        prop_assert_eq!(run(&f, &mut RandomHeuristic::new(seed), eager_restarts()), want);
        prop_assert_eq!(run(&f, &mut VsidsHeuristic::new(), SolverConfig::default()), want);
    }

    #[test]
    fn prefix_and_trail_discipline(f in arbitrary_qbf(), seed in any::<u64>()) {
        let f = Arc::new(f);
        let mut solver = Solver::new(f.clone(), eager_restarts());
        let mut h = RandomHeuristic::new(seed);
        while solver.status().truth().is_none() {
            let actions = solver.legal_actions();
            prop_assert!(!actions.is_empty());
            let universal_open = f.universals().iter().any(|&v| solver.value(v).is_none());
            for l in &actions {
                prop_assert!(!universal_open || f.is_universal(l.var()));
            }
            let lit = h.select(&solver).unwrap();
            solver.decide(lit).unwrap();

            let trail: Vec<_> = solver.trail().collect();
            prop_assert!(trail.windows(2).all(|w| w[0].level <= w[1].level));
            for e in &trail {
                if let Some(r) = e.reason {
                    let reason = &solver.clauses()[r as usize].clause;
                    prop_assert!(reason.lits.contains(&e.lit));
                    prop_assert!(!f.is_universal(e.lit.var()));
                    for &other in reason.lits.iter().filter(|&&o| o != e.lit) {
                        prop_assert_eq!(solver.lit_value(other), Some(false));
                    }
                }
            }
            if solver.status().truth().is_none() {
                // Propagation is complete: no clause is unit or conflicting.
                for c in solver.clauses() {
                    let lits = &c.clause.lits;
                    if lits.iter().any(|&l| solver.lit_value(l) == Some(true)) {
                        continue;
                    }
                    let open_exist = lits
                        .iter()
                        .filter(|&&l| solver.lit_value(l).is_none() && !f.is_universal(l.var()))
                        .count();
                    let open = lits.iter().filter(|&&l| solver.lit_value(l).is_none()).count();
                    prop_assert!(open_exist >= 1);
                    prop_assert!(open >= 2);
                }
            }
        }
    }
}
