use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::{Solver, SolverConfig, Truth};
use crate::formula::QbfFormula;
use crate::heuristics::{Heuristic, HeuristicError};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Limits {
    pub max_decisions: Option<u64>,
    pub max_seconds: Option<f64>,
}

impl Limits {
    pub fn decisions(max: u64) -> Limits {
        Limits {
            max_decisions: Some(max),
            max_seconds: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl From<Truth> for Verdict {
    fn from(t: Truth) -> Verdict {
        match t {
            Truth::True => Verdict::True,
            Truth::False => Verdict::False,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "TRUE",
            Verdict::False => "FALSE",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Verdict, String> {
        match s {
            "TRUE" => Ok(Verdict::True),
            "FALSE" => Ok(Verdict::False),
            "UNKNOWN" => Ok(Verdict::Unknown),
            other => Err(format!("unknown verdict {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnknownReason {
    None,
    DecisionLimit,
    TimeLimit,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::None => "NONE",
            UnknownReason::DecisionLimit => "DECISION_LIMIT",
            UnknownReason::TimeLimit => "TIME_LIMIT",
        })
    }
}

impl std::str::FromStr for UnknownReason {
    type Err = String;

    fn from_str(s: &str) -> Result<UnknownReason, String> {
        match s {
            "NONE" => Ok(UnknownReason::None),
            "DECISION_LIMIT" => Ok(UnknownReason::DecisionLimit),
            "TIME_LIMIT" => Ok(UnknownReason::TimeLimit),
            other => Err(format!("unknown reason {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub decisions_used: u64,
    pub conflicts: u64,
    pub reason_for_unknown: UnknownReason,
    pub elapsed: Duration,
}

/// Runs the search with `heuristic` choosing every branching literal.
pub fn solve(
    formula: Arc<QbfFormula>,
    heuristic: &mut dyn Heuristic,
    limits: Limits,
) -> Result<Outcome, HeuristicError> {
    solve_with(formula, heuristic, limits, SolverConfig::default())
}

pub fn solve_with(
    formula: Arc<QbfFormula>,
    heuristic: &mut dyn Heuristic,
    limits: Limits,
    config: SolverConfig,
) -> Result<Outcome, HeuristicError> {
    let mut solver = Solver::new(formula, config);
    run(&mut solver, heuristic, limits)
}

/// Drives an existing solver to a verdict or a limit. The solver stays available afterwards,
/// e.g. for its trace.
pub fn run(
    solver: &mut Solver,
    heuristic: &mut dyn Heuristic,
    limits: Limits,
) -> Result<Outcome, HeuristicError> {
    let start = Instant::now();
    heuristic.start(solver);
    loop {
        for vars in solver.drain_conflicts() {
            heuristic.on_conflict(&vars);
        }
        let outcome = |verdict, reason_for_unknown| Outcome {
            verdict,
            decisions_used: solver.decisions(),
            conflicts: solver.conflicts(),
            reason_for_unknown,
            elapsed: start.elapsed(),
        };
        if let Some(t) = solver.status().truth() {
            return Ok(outcome(t.into(), UnknownReason::None));
        }
        if limits.max_decisions.is_some_and(|m| solver.decisions() >= m) {
            return Ok(outcome(Verdict::Unknown, UnknownReason::DecisionLimit));
        }
        if limits
            .max_seconds
            .is_some_and(|s| start.elapsed().as_secs_f64() >= s)
        {
            return Ok(outcome(Verdict::Unknown, UnknownReason::TimeLimit));
        }
        let lit = heuristic.select(solver)?;
        solver.decide(lit)?;
    }
}
