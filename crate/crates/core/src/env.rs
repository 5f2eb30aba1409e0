//! Reset/step episode interface over the solver, producing observations.

use std::sync::Arc;

use crate::engine::{Solver, SolverConfig, StepError, Truth};
use crate::featurize::{Featurizer, Observation};
use crate::formula::{Lit, QbfFormula};

#[derive(Clone, Debug)]
pub struct StepResult {
    /// `None` once the episode is over.
    pub observation: Option<Observation>,
    pub verdict: Option<Truth>,
}

impl StepResult {
    pub fn is_terminal(&self) -> bool {
        self.verdict.is_some()
    }
}

pub struct QbfEnv {
    config: SolverConfig,
    solver: Option<Solver>,
    featurizer: Featurizer,
}

impl QbfEnv {
    pub fn new(config: SolverConfig) -> QbfEnv {
        QbfEnv {
            config,
            solver: None,
            featurizer: Featurizer::new(),
        }
    }

    pub fn reset(&mut self, formula: Arc<QbfFormula>) -> StepResult {
        self.featurizer = Featurizer::new();
        self.solver = Some(Solver::new(formula, self.config.clone()));
        self.result()
    }

    /// # Panics
    /// If called before [`QbfEnv::reset`].
    pub fn step(&mut self, action: Lit) -> Result<StepResult, StepError> {
        self.solver
            .as_mut()
            .expect("step called before reset")
            .decide(action)?;
        Ok(self.result())
    }

    pub fn solver(&self) -> Option<&Solver> {
        self.solver.as_ref()
    }

    fn result(&mut self) -> StepResult {
        let solver = self.solver.as_ref().expect("solver present");
        match solver.status().truth() {
            Some(t) => StepResult {
                observation: None,
                verdict: Some(t),
            },
            None => StepResult {
                observation: Some(self.featurizer.observe(solver)),
                verdict: None,
            },
        }
    }
}

impl Default for QbfEnv {
    fn default() -> Self {
        QbfEnv::new(SolverConfig::default())
    }
}
