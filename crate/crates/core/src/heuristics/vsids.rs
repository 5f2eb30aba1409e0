//! VSIDS variable order with Jeroslow-Wang polarity.

use super::{Heuristic, HeuristicError};
use crate::engine::Solver;
use crate::formula::{Clause, Lit, Var};

const RESCALE_ABOVE: f64 = 1e100;
const RESCALE_BY: f64 = 1e-100;

#[derive(Clone, Debug, PartialEq)]
pub struct VsidsState {
    pub activity: Vec<f64>,
    pub bump_amount: f64,
    pub decay_factor: f64,
}

impl VsidsState {
    pub fn new(num_vars: usize) -> VsidsState {
        VsidsState::with_decay(num_vars, 0.95)
    }

    pub fn with_decay(num_vars: usize, decay_factor: f64) -> VsidsState {
        assert!(decay_factor > 0.0 && decay_factor <= 1.0);
        VsidsState {
            activity: vec![0.0; num_vars],
            bump_amount: 1.0,
            decay_factor,
        }
    }

    /// Bumps every variable of one conflict, then decays by growing the bump amount.
    pub fn bump_and_decay(&mut self, vars: &[Var]) {
        for v in vars {
            self.activity[v.index()] += self.bump_amount;
        }
        self.bump_amount /= self.decay_factor;
        let max = self.activity.iter().copied().fold(self.bump_amount, f64::max);
        if max > RESCALE_ABOVE {
            for a in &mut self.activity {
                *a *= RESCALE_BY;
            }
            self.bump_amount *= RESCALE_BY;
        }
    }

    /// Most active variable with a legal literal; lowest index on ties.
    pub fn select_var(&self, mask: &[Lit]) -> Option<Var> {
        let mut best: Option<Var> = None;
        for l in mask {
            let v = l.var();
            let better = match best {
                None => true,
                Some(b) => {
                    let (a, ab) = (self.activity[v.index()], self.activity[b.index()]);
                    a > ab || (a == ab && v < b)
                }
            };
            if better {
                best = Some(v);
            }
        }
        best
    }
}

/// Sign with the larger Jeroslow-Wang weight `J(l) = Σ 2^-|c|` over clauses containing `l`;
/// positive on ties.
pub fn jw_polarity<'a>(clauses: impl IntoIterator<Item = &'a Clause>, var: Var) -> bool {
    let weights = jw_weights(clauses, var.index() + 1);
    weights[var.positive().index()] >= weights[var.negative().index()]
}

fn jw_weights<'a>(clauses: impl IntoIterator<Item = &'a Clause>, num_vars: usize) -> Vec<f64> {
    let mut w = vec![0.0; 2 * num_vars];
    for c in clauses {
        let weight = (-(c.len() as f64)).exp2();
        for l in &c.lits {
            if let Some(slot) = w.get_mut(l.index()) {
                *slot += weight;
            }
        }
    }
    w
}

pub struct VsidsHeuristic {
    state: VsidsState,
    decay_factor: f64,
    jw: Vec<f64>,
    jw_version: Option<(u64, u64)>,
}

impl VsidsHeuristic {
    pub fn new() -> VsidsHeuristic {
        VsidsHeuristic::with_decay(0.95)
    }

    pub fn with_decay(decay_factor: f64) -> VsidsHeuristic {
        VsidsHeuristic {
            state: VsidsState::with_decay(0, decay_factor),
            decay_factor,
            jw: Vec::new(),
            jw_version: None,
        }
    }

    pub fn state(&self) -> &VsidsState {
        &self.state
    }
}

impl Default for VsidsHeuristic {
    fn default() -> Self {
        VsidsHeuristic::new()
    }
}

impl Heuristic for VsidsHeuristic {
    fn name(&self) -> &str {
        "vsids"
    }

    fn start(&mut self, solver: &Solver) {
        self.state = VsidsState::with_decay(solver.num_vars(), self.decay_factor);
        self.jw_version = None;
    }

    fn select(&mut self, solver: &Solver) -> Result<Lit, HeuristicError> {
        if self.state.activity.len() != solver.num_vars() {
            self.start(solver);
        }
        let var = self
            .state
            .select_var(&solver.legal_actions())
            .ok_or(HeuristicError::EmptyMask)?;
        let version = (solver.clause_version(), solver.deletion_epoch());
        if self.jw_version != Some(version) {
            self.jw = jw_weights(solver.clauses().iter().map(|c| &c.clause), solver.num_vars());
            self.jw_version = Some(version);
        }
        let positive = self.jw[var.positive().index()] >= self.jw[var.negative().index()];
        Ok(if positive { var.positive() } else { var.negative() })
    }

    fn on_conflict(&mut self, vars: &[Var]) {
        self.state.bump_and_decay(vars);
    }
}
