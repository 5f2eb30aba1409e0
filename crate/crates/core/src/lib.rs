//! 2QBF backtracking search with pluggable branching heuristics, a graph neural network policy
//! trained with REINFORCE, and an evaluation harness.

pub mod engine;
pub mod env;
pub mod featurize;
pub mod formula;
pub mod harness;
pub mod heuristics;
pub mod neural;
pub mod rng;
pub mod trainer;

pub use engine::{solve, Limits, Outcome, Solver, SolverConfig, Verdict};
pub use featurize::Observation;
pub use formula::{parse_qdimacs, write_qdimacs, Clause, Lit, QbfFormula, Quant, Var};
pub use heuristics::{Heuristic, PolicyHeuristic, RandomHeuristic, VsidsHeuristic};
pub use neural::{Hyper, PolicyParams};
pub use trainer::{TrainConfig, Trainer};
