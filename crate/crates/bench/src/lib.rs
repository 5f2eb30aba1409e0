//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use qbrn::engine::{Solver, SolverConfig};
use qbrn::featurize::{build_observation, Observation};
use qbrn::formula::{generate_boolean_family, BooleanFamilyConfig, QbfFormula};
use qbrn::harness::is_trivial;

/// Mid-sized generated formulas that need at least one decision.
pub fn bench_config() -> BooleanFamilyConfig {
    BooleanFamilyConfig {
        num_inputs: 20,
        gate_limit_range: (40, 120),
        extra_clause_fraction: 0.05,
        num_universals: 6,
    }
}

pub fn formulas(n: usize) -> Vec<Arc<QbfFormula>> {
    let cfg = bench_config();
    (0..)
        .map(|s| Arc::new(generate_boolean_family(s, &cfg).expect("valid config")))
        .filter(|f| !is_trivial(f))
        .take(n)
        .collect()
}

/// Root observation of the first non-trivial bench formula.
pub fn observation() -> Observation {
    let f = formulas(1).remove(0);
    build_observation(&Solver::new(f, SolverConfig::default()))
}
