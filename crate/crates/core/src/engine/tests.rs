use super::*;
use crate::formula::parse_qdimacs;

fn solver(text: &str) -> Solver {
    let f = parse_qdimacs(text.as_bytes()).unwrap();
    Solver::new(
        Arc::new(f),
        SolverConfig {
            trace: true,
            ..SolverConfig::default()
        },
    )
}

fn lit(d: i32) -> Lit {
    Lit::from_dimacs(d).unwrap()
}

const EXAMPLE: &str = "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 2 0\n";

#[test]
fn unit_formula_true_at_reset() {
    let s = solver("p cnf 1 1\ne 1 0\n1 0\n");
    assert_eq!(s.status(), Status::Decided(Truth::True));
    assert_eq!(s.decisions(), 0);
}

#[test]
fn contradictory_units_false_at_reset() {
    let s = solver("p cnf 1 2\ne 1 0\n1 0\n-1 0\n");
    assert_eq!(s.status(), Status::Decided(Truth::False));
    assert_eq!(s.decisions(), 0);
}

#[test]
fn all_universal_clause_false_at_reset() {
    let s = solver("p cnf 3 2\na 1 2 0\ne 3 0\n1 2 0\n3 0\n");
    assert_eq!(s.status(), Status::Decided(Truth::False));
}

#[test]
fn universal_unit_clause_false_at_reset() {
    let s = solver("p cnf 2 1\na 1 0\ne 2 0\n1 0\n");
    assert_eq!(s.status(), Status::Decided(Truth::False));
}

#[test]
fn empty_formula_true() {
    let s = solver("p cnf 3 0\na 1 0\ne 2 3 0\n");
    assert_eq!(s.status(), Status::Decided(Truth::True));
}

#[test]
fn example_offers_only_universal_actions() {
    let s = solver(EXAMPLE);
    assert_eq!(s.status(), Status::Open);
    assert_eq!(s.open_block(), Some(Quant::Universal));
    assert_eq!(s.legal_actions(), vec![lit(1), lit(-1)]);
}

#[test]
fn example_hand_trace() {
    let mut s = solver(EXAMPLE);
    assert_eq!(s.decide(lit(1)), Ok(Status::Decided(Truth::True)));
    assert_eq!(s.decisions(), 1);
    let trace: Vec<String> = s.trace().iter().map(|e| e.to_string()).collect();
    assert_eq!(trace, ["d 1 1", "f 1 -1", "v TRUE"]);
}

#[test]
fn illegal_actions_leave_state_unchanged() {
    let mut s = solver(EXAMPLE);
    // Existential while a universal is open.
    assert_eq!(s.decide(lit(2)), Err(StepError::IllegalAction(lit(2))));
    assert_eq!(s.decisions(), 0);
    assert_eq!(s.num_assigned(), 0);

    let mut s = solver("p cnf 3 2\na 1 0\ne 2 3 0\n1 2 3 0\n-1 2 -3 0\n");
    s.decide(lit(-1)).unwrap();
    let before: Vec<TrailEntry> = s.trail().collect();
    assert_eq!(s.decide(lit(1)), Err(StepError::IllegalAction(lit(1))));
    assert_eq!(s.decide(lit(-1)), Err(StepError::IllegalAction(lit(-1))));
    assert_eq!(s.decisions(), 1);
    assert_eq!(s.trail().collect::<Vec<_>>(), before);
}

#[test]
fn terminated_solver_rejects_steps() {
    let mut s = solver(EXAMPLE);
    s.decide(lit(-1)).unwrap();
    assert!(s.status().truth().is_some());
    assert_eq!(s.decide(lit(2)), Err(StepError::Terminated));
}

#[test]
fn unit_rule_records_reason() {
    let mut s = solver("p cnf 4 2\na 1 0\ne 2 3 4 0\n-1 2 0\n3 4 0\n");
    assert_eq!(s.decide(lit(1)), Ok(Status::Open));
    let entries: Vec<TrailEntry> = s.trail().collect();
    assert_eq!(entries[0].lit, lit(1));
    assert_eq!(entries[0].reason, None);
    let y = entries.iter().find(|e| e.lit == lit(2)).unwrap();
    assert_eq!(y.level, 1);
    assert_eq!(y.reason, Some(0));
}

#[test]
fn universal_reduction_conflict() {
    // x1 = FALSE leaves (x1 ∨ x2) with only a universal literal.
    let mut s = solver("p cnf 3 2\na 1 2 0\ne 3 0\n1 2 3 0\n1 2 -3 0\n");
    assert_eq!(s.status(), Status::Open);
    s.decide(lit(-1)).unwrap();
    // Deciding x2 = FALSE makes both clauses force opposite values of y.
    assert_eq!(s.decide(lit(-2)), Ok(Status::Decided(Truth::False)));
}

#[test]
fn reduction_conflict_with_unassigned_universal() {
    // After x1 = FALSE, (y ∨ x1) implies y and (x1 ∨ x2 ∨ ¬y) is left with the open universal x2.
    let mut s = solver("p cnf 3 2\na 1 2 0\ne 3 0\n1 2 -3 0\n3 1 0\n");
    assert_eq!(s.num_assigned(), 0);
    assert_eq!(s.decide(lit(-1)), Ok(Status::Decided(Truth::False)));
    assert_eq!(s.conflicts(), 1);
}

#[test]
fn first_uip_hand_trace() {
    let mut s = solver("p cnf 3 3\ne 1 2 3 0\n-1 2 0\n-1 3 0\n-2 -3 0\n");
    s.decide(lit(1)).unwrap();
    let learned: Vec<&Clause> = s.learned_clauses().collect();
    assert_eq!(learned.len(), 1);
    assert_eq!(learned[0].lits, vec![lit(-1)]);
    assert_eq!(s.level(Var::new(1)), Some(0));
    assert_eq!(s.value(Var::new(1)), Some(false));
    let trace: Vec<String> = s.trace().iter().map(|e| e.to_string()).collect();
    assert_eq!(trace[..2], ["d 1 1", "c 1 0 1"]);
    let touched = s.drain_conflicts();
    let mut vars: Vec<u32> = touched[0].iter().map(|v| v.number()).collect();
    vars.sort();
    assert_eq!(vars, [1, 2, 3]);
}

#[test]
fn learned_clause_with_universal() {
    // ∀x ∃y z: (¬x ∨ y)(¬x ∨ z)(¬y ∨ ¬z). Deciding x forces a conflict whose analysis ends in
    // the all-universal clause (¬x): false.
    let mut s = solver("p cnf 3 3\na 1 0\ne 2 3 0\n-1 2 0\n-1 3 0\n-2 -3 0\n");
    assert_eq!(s.decide(lit(1)), Ok(Status::Decided(Truth::False)));
}

#[test]
fn restart_schedule() {
    let mut s = solver("p cnf 0 0\n");
    assert_eq!(s.conflicts_until_restart(), 100);
    let mut intervals = Vec::new();
    for _ in 0..10 {
        s.restart();
        intervals.push(s.conflicts_until_restart());
    }
    assert_eq!(intervals[..4], [150, 225, 337, 506]);
    assert_eq!(s.restarts(), 10);
    assert_eq!(s.restarts_since_major(), 0);
    assert_eq!(s.deletion_epoch(), 1);
    let majors: Vec<bool> = s
        .trace()
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Restart { major, .. } => Some(*major),
            _ => None,
        })
        .collect();
    assert_eq!(majors.iter().filter(|m| **m).count(), 1);
    assert!(majors[9]);
}

#[test]
fn trace_lines_follow_schema() {
    let events = [
        TraceEvent::Decision { level: 2, lit: lit(-4) },
        TraceEvent::Flip { level: 1, lit: lit(3) },
        TraceEvent::Conflict {
            index: 7,
            backjump: 1,
            learned_len: 3,
        },
        TraceEvent::Restart { index: 2, major: false },
        TraceEvent::Verdict(Truth::False),
    ];
    let lines: Vec<String> = events.iter().map(|e| e.to_string()).collect();
    assert_eq!(lines, ["d 2 -4", "f 1 3", "c 7 1 3", "r 2 0", "v FALSE"]);
}
