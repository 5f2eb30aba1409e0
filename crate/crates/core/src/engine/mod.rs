//! QDPLL-style backtracking search for `∀X.∃Y.φ`.
//!
//! The solver decides variables of the outermost block that still has unassigned variables
//! (universals first), propagates with two watched literals, learns clauses by first-UIP
//! Q-resolution over existential pivots, and restarts on a geometric schedule. When the current
//! assignment satisfies every original clause the existential player has won the current
//! universal branch; the deepest universal decision that has not been flipped yet is flipped, and
//! the formula is true once none is left.
//!
//! Branching decisions come from outside: [`Solver::decide`] is one agent step. [`solve`] drives
//! a [`Heuristic`](crate::heuristics::Heuristic) to completion.

mod analyze;
mod propagate;
mod restart;
mod solve;

pub use restart::RestartSchedule;
pub use solve::{run, solve, solve_with, Limits, Outcome, UnknownReason, Verdict};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::formula::{Clause, Lit, Origin, QbfFormula, Quant, Var};

/// Index into the solver's clause store. Original clauses come first, in input order.
pub type ClauseRef = u32;

/// Final truth value of a formula.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Truth {
    True,
    False,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Open,
    Decided(Truth),
}

impl Status {
    pub fn truth(self) -> Option<Truth> {
        match self {
            Status::Open => None,
            Status::Decided(t) => Some(t),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverConfig {
    pub restarts: RestartSchedule,
    /// Record a [`TraceEvent`] log.
    pub trace: bool,
}

/// Rejected [`Solver::decide`] calls. The solver state is unchanged.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("illegal action {0}: variable assigned or not in the open quantifier block")]
    IllegalAction(Lit),
    #[error("the search has already terminated")]
    Terminated,
}

/// A clause in the store together with bookkeeping for deletion.
#[derive(Clone, Debug)]
pub struct StoredClause {
    pub clause: Clause,
    /// Unique for the lifetime of the solver; never reused after deletion.
    pub id: u64,
    /// Conflict count when the clause last took part in conflict analysis.
    last_used: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrailEntry {
    pub lit: Lit,
    pub level: u32,
    /// `None` for decisions (and flipped universal decisions).
    pub reason: Option<ClauseRef>,
}

#[derive(Clone, Copy, Debug)]
struct LevelDecision {
    lit: Lit,
    flipped: bool,
}

/// One line of the debugging trace.
///
/// Text schema, one event per line:
///
/// ```text
/// d <level> <lit>                     decision by the agent
/// f <level> <lit>                     flipped universal decision
/// c <conflict#> <backjump> <length>   conflict, learned clause length (0 = formula false)
/// r <restart#> <major 0|1>            restart
/// v TRUE|FALSE                        verdict
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Decision { level: u32, lit: Lit },
    Flip { level: u32, lit: Lit },
    Conflict { index: u64, backjump: u32, learned_len: usize },
    Restart { index: u64, major: bool },
    Verdict(Truth),
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match *self {
            TraceEvent::Decision { level, lit } => write!(f, "d {level} {lit}"),
            TraceEvent::Flip { level, lit } => write!(f, "f {level} {lit}"),
            TraceEvent::Conflict {
                index,
                backjump,
                learned_len,
            } => write!(f, "c {index} {backjump} {learned_len}"),
            TraceEvent::Restart { index, major } => write!(f, "r {index} {}", u8::from(major)),
            TraceEvent::Verdict(Truth::True) => write!(f, "v TRUE"),
            TraceEvent::Verdict(Truth::False) => write!(f, "v FALSE"),
        }
    }
}

/// Search state for one formula.
pub struct Solver {
    formula: Arc<QbfFormula>,
    config: SolverConfig,

    clauses: Vec<StoredClause>,
    num_original: usize,
    /// Per literal index: clauses currently watching that literal (positions 0 and 1).
    watches: Vec<Vec<ClauseRef>>,

    values: Vec<Option<bool>>,
    levels: Vec<u32>,
    reasons: Vec<Option<ClauseRef>>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    /// Trail index at which each decision level above 0 starts.
    trail_lim: Vec<usize>,
    level_decisions: Vec<LevelDecision>,
    qhead: usize,

    status: Status,
    decisions: u64,
    conflicts: u64,
    restarts: u64,
    restarts_since_major: u64,
    conflicts_until_restart: u64,
    restart_interval: f64,

    clause_version: u64,
    deletion_epoch: u64,
    next_clause_id: u64,

    /// Variables touched by each conflict analysis, not yet handed to the heuristic.
    pending_conflicts: Vec<Vec<Var>>,
    trace: Vec<TraceEvent>,
    seen: Vec<bool>,
}

impl Solver {
    /// Builds the solver and performs top-level propagation. The formula may already be decided
    /// afterwards; check [`Solver::status`].
    pub fn new(formula: Arc<QbfFormula>, config: SolverConfig) -> Solver {
        let n = formula.num_vars() as usize;
        let clauses: Vec<StoredClause> = formula
            .clauses()
            .iter()
            .enumerate()
            .map(|(i, c)| StoredClause {
                clause: c.clone(),
                id: i as u64,
                last_used: 0,
            })
            .collect();
        let num_original = clauses.len();
        let first_restart = config.restarts.first;
        let mut solver = Solver {
            formula,
            config,
            clauses,
            num_original,
            watches: vec![Vec::new(); 2 * n],
            values: vec![None; n],
            levels: vec![0; n],
            reasons: vec![None; n],
            trail_pos: vec![0; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            level_decisions: Vec::new(),
            qhead: 0,
            status: Status::Open,
            decisions: 0,
            conflicts: 0,
            restarts: 0,
            restarts_since_major: 0,
            conflicts_until_restart: first_restart,
            restart_interval: first_restart as f64,
            clause_version: 0,
            deletion_epoch: 0,
            next_clause_id: num_original as u64,
            pending_conflicts: Vec::new(),
            trace: Vec::new(),
            seen: vec![false; n],
        };
        solver.initialize();
        solver
    }

    fn initialize(&mut self) {
        for ci in 0..self.clauses.len() {
            let lits = &mut self.clauses[ci].clause.lits;
            match lits.len() {
                0 => return self.finish(Truth::False),
                1 => {
                    let l = lits[0];
                    if self.formula.is_universal(l.var()) {
                        // Universal reduction empties the clause.
                        return self.finish(Truth::False);
                    }
                    match self.lit_value(l) {
                        Some(true) => {}
                        Some(false) => return self.finish(Truth::False),
                        None => self.assign(l, Some(ci as ClauseRef)),
                    }
                }
                _ => {
                    let formula = &self.formula;
                    let exists = |l: &Lit| !formula.is_universal(l.var());
                    let Some(first) = lits.iter().position(exists) else {
                        return self.finish(Truth::False);
                    };
                    lits.swap(0, first);
                    if let Some(second) = lits[1..].iter().position(exists) {
                        lits.swap(1, second + 1);
                    }
                    let (w0, w1) = (lits[0], lits[1]);
                    self.watches[w0.index()].push(ci as ClauseRef);
                    self.watches[w1.index()].push(ci as ClauseRef);
                }
            }
        }
        self.search();
    }

    pub fn formula(&self) -> &Arc<QbfFormula> {
        &self.formula
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    /// Current clause store: original clauses followed by learned clauses.
    pub fn clauses(&self) -> &[StoredClause] {
        &self.clauses
    }

    pub fn num_original_clauses(&self) -> usize {
        self.num_original
    }

    pub fn learned_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses[self.num_original..].iter().map(|c| &c.clause)
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.values[var.index()]
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.values[lit.var().index()].map(|v| lit.eval(v))
    }

    /// Decision level of an assigned variable.
    pub fn level(&self, var: Var) -> Option<u32> {
        self.values[var.index()].map(|_| self.levels[var.index()])
    }

    pub fn reason(&self, var: Var) -> Option<ClauseRef> {
        self.reasons[var.index()]
    }

    /// Assigned by a decision (or a flipped decision) rather than by propagation.
    pub fn is_decision(&self, var: Var) -> bool {
        self.values[var.index()].is_some() && self.reasons[var.index()].is_none()
    }

    pub fn trail(&self) -> impl Iterator<Item = TrailEntry> + '_ {
        self.trail.iter().map(|&lit| TrailEntry {
            lit,
            level: self.levels[lit.var().index()],
            reason: self.reasons[lit.var().index()],
        })
    }

    pub fn num_assigned(&self) -> usize {
        self.trail.len()
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Number of accepted [`Solver::decide`] calls.
    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn restarts(&self) -> u64 {
        self.restarts
    }

    pub fn restarts_since_major(&self) -> u64 {
        self.restarts_since_major
    }

    pub fn conflicts_until_restart(&self) -> u64 {
        self.conflicts_until_restart
    }

    /// Incremented whenever the clause store changes (learning or deletion).
    pub fn clause_version(&self) -> u64 {
        self.clause_version
    }

    /// Incremented whenever clauses are deleted, which renumbers learned clauses.
    pub fn deletion_epoch(&self) -> u64 {
        self.deletion_epoch
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// Hands out the variables touched by each conflict analysis since the last call.
    pub fn drain_conflicts(&mut self) -> Vec<Vec<Var>> {
        std::mem::take(&mut self.pending_conflicts)
    }

    /// The outermost quantifier block with unassigned variables.
    pub fn open_block(&self) -> Option<Quant> {
        let unassigned = |vars: &[Var]| vars.iter().any(|v| self.values[v.index()].is_none());
        if unassigned(self.formula.universals()) {
            Some(Quant::Universal)
        } else if unassigned(self.formula.existentials()) {
            Some(Quant::Existential)
        } else {
            None
        }
    }

    /// Both literals of every unassigned variable of the open block, by literal index.
    pub fn legal_actions(&self) -> Vec<Lit> {
        if self.status != Status::Open {
            return Vec::new();
        }
        let Some(block) = self.open_block() else {
            return Vec::new();
        };
        (0..self.num_vars())
            .map(Var::from_index)
            .filter(|&v| self.values[v.index()].is_none() && self.formula.quant(v) == block)
            .flat_map(|v| [v.positive(), v.negative()])
            .collect()
    }

    pub fn is_legal(&self, lit: Lit) -> bool {
        self.status == Status::Open
            && lit.var().index() < self.num_vars()
            && self.values[lit.var().index()].is_none()
            && Some(self.formula.quant(lit.var())) == self.open_block()
    }

    /// One agent step: decides `lit`, then propagates, learns, backjumps and flips universal
    /// branches until the search needs the next decision or terminates.
    pub fn decide(&mut self, lit: Lit) -> Result<Status, StepError> {
        if self.status != Status::Open {
            return Err(StepError::Terminated);
        }
        if !self.is_legal(lit) {
            return Err(StepError::IllegalAction(lit));
        }
        self.decisions += 1;
        self.new_level(lit, false);
        if self.config.trace {
            self.trace.push(TraceEvent::Decision {
                level: self.decision_level(),
                lit,
            });
        }
        self.search();
        Ok(self.status)
    }

    fn search(&mut self) {
        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                self.conflicts_until_restart = self.conflicts_until_restart.saturating_sub(1);
                if self.decision_level() == 0 {
                    self.trace_conflict(0, 0);
                    return self.finish(Truth::False);
                }
                match self.analyze(conflict) {
                    analyze::Analysis::Falsified { touched } => {
                        self.pending_conflicts.push(touched);
                        self.trace_conflict(0, 0);
                        return self.finish(Truth::False);
                    }
                    analyze::Analysis::Learned {
                        lits,
                        backjump,
                        touched,
                    } => {
                        self.pending_conflicts.push(touched);
                        self.trace_conflict(backjump, lits.len());
                        self.backtrack(backjump);
                        let asserting = lits[0];
                        let cref = self.add_learned(lits);
                        self.assign(asserting, Some(cref));
                    }
                }
                if self.conflicts_until_restart == 0 {
                    self.restart();
                }
                continue;
            }
            if self.originals_satisfied() {
                match self.deepest_unflipped_universal() {
                    None => return self.finish(Truth::True),
                    Some(level) => self.flip(level),
                }
                continue;
            }
            return;
        }
    }

    fn finish(&mut self, truth: Truth) {
        self.status = Status::Decided(truth);
        if self.config.trace {
            self.trace.push(TraceEvent::Verdict(truth));
        }
    }

    fn trace_conflict(&mut self, backjump: u32, learned_len: usize) {
        if self.config.trace {
            self.trace.push(TraceEvent::Conflict {
                index: self.conflicts,
                backjump,
                learned_len,
            });
        }
    }

    fn originals_satisfied(&self) -> bool {
        if self.trail.len() == self.num_vars() {
            return true;
        }
        self.clauses[..self.num_original]
            .iter()
            .all(|c| c.clause.lits.iter().any(|&l| self.lit_value(l) == Some(true)))
    }

    fn deepest_unflipped_universal(&self) -> Option<u32> {
        self.level_decisions
            .iter()
            .rposition(|d| !d.flipped && self.formula.is_universal(d.lit.var()))
            .map(|i| i as u32 + 1)
    }

    fn flip(&mut self, level: u32) {
        let lit = !self.level_decisions[level as usize - 1].lit;
        self.backtrack(level - 1);
        self.new_level(lit, true);
        if self.config.trace {
            self.trace.push(TraceEvent::Flip { level, lit });
        }
    }

    fn new_level(&mut self, lit: Lit, flipped: bool) {
        self.trail_lim.push(self.trail.len());
        self.level_decisions.push(LevelDecision { lit, flipped });
        self.assign(lit, None);
    }

    fn assign(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        let v = lit.var().index();
        debug_assert!(self.values[v].is_none());
        self.values[v] = Some(lit.is_positive());
        self.levels[v] = self.decision_level();
        self.reasons[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(lit);
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for &lit in &self.trail[start..] {
            let v = lit.var().index();
            self.values[v] = None;
            self.reasons[v] = None;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.level_decisions.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn add_learned(&mut self, lits: Vec<Lit>) -> ClauseRef {
        let cref = self.clauses.len() as ClauseRef;
        if lits.len() >= 2 {
            self.watches[lits[0].index()].push(cref);
            self.watches[lits[1].index()].push(cref);
        }
        self.clauses.push(StoredClause {
            clause: Clause::new(lits, Origin::Learned),
            id: self.next_clause_id,
            last_used: self.conflicts,
        });
        self.next_clause_id += 1;
        self.clause_version += 1;
        cref
    }

    fn is_universal(&self, lit: Lit) -> bool {
        self.formula.is_universal(lit.var())
    }
}

#[cfg(test)]
mod tests;
