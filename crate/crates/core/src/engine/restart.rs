//! Geometric restarts and learned-clause reduction.

use super::{ClauseRef, Solver, TraceEvent};

#[derive(Clone, Debug, PartialEq)]
pub struct RestartSchedule {
    /// Conflicts before the first restart.
    pub first: u64,
    /// Factor applied to the interval after every restart (result floored).
    pub growth: f64,
    /// Every `major_every`-th restart also halves the learned clause store.
    pub major_every: u64,
    pub enabled: bool,
}

impl Default for RestartSchedule {
    fn default() -> Self {
        RestartSchedule {
            first: 100,
            growth: 1.5,
            major_every: 10,
            enabled: true,
        }
    }
}

impl Solver {
    pub(super) fn restart(&mut self) {
        let schedule = self.config.restarts.clone();
        if !schedule.enabled {
            self.conflicts_until_restart = u64::MAX;
            return;
        }
        self.backtrack(0);
        self.restarts += 1;
        self.restarts_since_major += 1;
        let major = schedule.major_every > 0 && self.restarts.is_multiple_of(schedule.major_every);
        if major {
            self.restarts_since_major = 0;
            self.reduce_learned();
        }
        self.restart_interval *= schedule.growth;
        self.conflicts_until_restart = (self.restart_interval.floor() as u64).max(1);
        if self.config.trace {
            self.trace.push(TraceEvent::Restart {
                index: self.restarts,
                major,
            });
        }
    }

    /// Keeps the more recently used half of the unlocked learned clauses, plus every clause that
    /// is the reason of a current assignment. Learned clauses are renumbered.
    fn reduce_learned(&mut self) {
        let locked: Vec<bool> = {
            let mut locked = vec![false; self.clauses.len()];
            for &l in &self.trail {
                if let Some(r) = self.reasons[l.var().index()] {
                    locked[r as usize] = true;
                }
            }
            locked
        };
        let mut candidates: Vec<usize> = (self.num_original..self.clauses.len())
            .filter(|&i| !locked[i])
            .collect();
        candidates.sort_by_key(|&i| {
            let c = &self.clauses[i];
            std::cmp::Reverse((c.last_used, c.id))
        });
        let mut keep = locked;
        for &i in candidates.iter().take(candidates.len().div_ceil(2)) {
            keep[i] = true;
        }
        let mut remap: Vec<Option<ClauseRef>> = vec![None; self.clauses.len()];
        let old = std::mem::take(&mut self.clauses);
        for (i, c) in old.into_iter().enumerate() {
            if i < self.num_original || keep[i] {
                remap[i] = Some(self.clauses.len() as ClauseRef);
                self.clauses.push(c);
            }
        }
        for r in self.reasons.iter_mut() {
            if let Some(old) = *r {
                *r = remap[old as usize];
            }
        }
        for w in &mut self.watches {
            w.clear();
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.clause.lits.len() >= 2 {
                self.watches[c.clause.lits[0].index()].push(i as ClauseRef);
                self.watches[c.clause.lits[1].index()].push(i as ClauseRef);
            }
        }
        self.deletion_epoch += 1;
        self.clause_version += 1;
    }
}
