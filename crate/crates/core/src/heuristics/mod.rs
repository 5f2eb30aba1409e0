//! Branching heuristics: the agent side of [`Solver::decide`].

mod policy;
mod random;
mod vsids;

pub use policy::{argmax, sample_index, PolicyHeuristic, PolicyMode};
pub use random::RandomHeuristic;
pub use vsids::{jw_polarity, VsidsHeuristic, VsidsState};

use thiserror::Error;

use crate::engine::{Solver, StepError};
use crate::formula::Var;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("no legal action available")]
    EmptyMask,
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("policy evaluation failed: {0}")]
    Policy(String),
}

/// Chooses branching literals for one solver run at a time.
pub trait Heuristic {
    fn name(&self) -> &str;

    /// Called once with the freshly initialized solver of a new run.
    fn start(&mut self, _solver: &Solver) {}

    /// Returns one of `solver.legal_actions()`.
    fn select(&mut self, solver: &Solver) -> Result<crate::formula::Lit, HeuristicError>;

    /// Variables touched by one conflict analysis.
    fn on_conflict(&mut self, _vars: &[Var]) {}
}

impl<H: Heuristic + ?Sized> Heuristic for Box<H> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn start(&mut self, solver: &Solver) {
        (**self).start(solver)
    }

    fn select(&mut self, solver: &Solver) -> Result<crate::formula::Lit, HeuristicError> {
        (**self).select(solver)
    }

    fn on_conflict(&mut self, vars: &[Var]) {
        (**self).on_conflict(vars)
    }
}
