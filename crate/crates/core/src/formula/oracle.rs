//! Brute-force truth of a 2QBF, used as an independent check of the search engine.
//!
//! Enumerates all assignments of the universal block and decides each residual SAT problem with
//! a deliberately naive DPLL (unit propagation by full clause scans, no learning).

use thiserror::Error;

use super::{Lit, QbfFormula};

/// Size limits for [`oracle_truth`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCap {
    pub max_vars: u32,
    pub max_universals: u32,
}

impl Default for OracleCap {
    fn default() -> Self {
        OracleCap {
            max_vars: 24,
            max_universals: 16,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("formula with {vars} variables ({universals} universal) exceeds the oracle cap {cap:?}")]
pub struct OracleError {
    pub vars: u32,
    pub universals: u32,
    pub cap: OracleCap,
}

/// `true` iff for every assignment of the universals some assignment of the existentials
/// satisfies every clause.
pub fn oracle_truth(f: &QbfFormula, cap: OracleCap) -> Result<bool, OracleError> {
    let universals = f.universals().len() as u32;
    if f.num_vars() > cap.max_vars || universals > cap.max_universals {
        return Err(OracleError {
            vars: f.num_vars(),
            universals,
            cap,
        });
    }
    let clauses: Vec<&[Lit]> = f.clauses().iter().map(|c| c.lits.as_slice()).collect();
    for bits in 0u64..(1u64 << universals) {
        let mut assignment: Vec<Option<bool>> = vec![None; f.num_vars() as usize];
        for (i, v) in f.universals().iter().enumerate() {
            assignment[v.index()] = Some(bits >> i & 1 == 1);
        }
        if !satisfiable(&clauses, &mut assignment) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn value(assignment: &[Option<bool>], l: Lit) -> Option<bool> {
    assignment[l.var().index()].map(|v| l.eval(v))
}

fn satisfiable(clauses: &[&[Lit]], assignment: &mut Vec<Option<bool>>) -> bool {
    let saved = assignment.clone();
    // Unit propagation to fixpoint.
    loop {
        let mut changed = false;
        for c in clauses {
            let mut unassigned = None;
            let mut open = 0;
            let mut sat = false;
            for &l in c.iter() {
                match value(assignment, l) {
                    Some(true) => {
                        sat = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open += 1;
                        unassigned = Some(l);
                    }
                }
            }
            if sat {
                continue;
            }
            match open {
                0 => {
                    *assignment = saved;
                    return false;
                }
                1 => {
                    let l = unassigned.unwrap();
                    assignment[l.var().index()] = Some(l.is_positive());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let branch = clauses.iter().find_map(|c| {
        if c.iter().any(|&l| value(assignment, l) == Some(true)) {
            return None;
        }
        c.iter().find(|&&l| value(assignment, l).is_none()).copied()
    });
    let Some(l) = branch else {
        // Every clause satisfied.
        *assignment = saved;
        return true;
    };
    for polarity in [true, false] {
        assignment[l.var().index()] = Some(polarity);
        if satisfiable(clauses, assignment) {
            *assignment = saved;
            return true;
        }
    }
    *assignment = saved;
    false
}
