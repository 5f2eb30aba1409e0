//! First-UIP conflict analysis with Q-resolution.
//!
//! Resolution pivots are always existential (universals are never implied). The working clause
//! is asserting once it contains exactly one existential literal at the deepest existential level
//! `d` and every other literal is false below `d`; universals that are unassigned or assigned at
//! level ≥ `d` would be reduced away at the backjump level, so resolution continues past them. A
//! working clause without existentials is falsified by universal reduction alone.

use super::{ClauseRef, Solver};
use crate::formula::{Lit, Var};

pub(super) enum Analysis {
    /// The formula is false.
    Falsified { touched: Vec<Var> },
    /// `lits[0]` is the asserting literal, `lits[1]` (if any) the deepest of the rest.
    Learned {
        lits: Vec<Lit>,
        backjump: u32,
        touched: Vec<Var>,
    },
}

impl Solver {
    pub(super) fn analyze(&mut self, conflict: ClauseRef) -> Analysis {
        let mut work: Vec<Lit> = Vec::new();
        let mut touched: Vec<Var> = Vec::new();
        let mut touched_mark = vec![false; self.num_vars()];
        self.absorb(conflict, None, &mut work, &mut touched, &mut touched_mark);

        let result = loop {
            let mut deepest = None::<u32>;
            let mut at_deepest = 0;
            let mut latest: Option<(u32, usize)> = None;
            for (i, &l) in work.iter().enumerate() {
                if self.is_universal(l) {
                    continue;
                }
                let v = l.var().index();
                let lv = self.levels[v];
                match deepest {
                    Some(d) if lv < d => {}
                    Some(d) if lv == d => at_deepest += 1,
                    _ => {
                        deepest = Some(lv);
                        at_deepest = 1;
                    }
                }
                if latest.is_none_or(|(pos, _)| self.trail_pos[v] > pos) {
                    latest = Some((self.trail_pos[v], i));
                }
            }
            let Some(d) = deepest else {
                break Analysis::Falsified {
                    touched: std::mem::take(&mut touched),
                };
            };
            let blocked = work.iter().any(|&l| {
                self.is_universal(l)
                    && self.values[l.var().index()].is_none_or(|_| self.levels[l.var().index()] >= d)
            });
            if at_deepest == 1 && !blocked {
                break self.asserting(work, d, std::mem::take(&mut touched));
            }
            let (_, i) = latest.expect("an existential literal exists");
            let pivot = work.swap_remove(i);
            self.seen[pivot.var().index()] = false;
            let reason = self.reasons[pivot.var().index()]
                .expect("the latest existential of a non-asserting clause is implied");
            self.absorb(reason, Some(pivot), &mut work, &mut touched, &mut touched_mark);
        };
        self.seen.fill(false);
        result
    }

    /// Adds the literals of `cref` (except the negated pivot) to the working clause.
    fn absorb(
        &mut self,
        cref: ClauseRef,
        pivot: Option<Lit>,
        work: &mut Vec<Lit>,
        touched: &mut Vec<Var>,
        touched_mark: &mut [bool],
    ) {
        self.clauses[cref as usize].last_used = self.conflicts;
        for &q in &self.clauses[cref as usize].clause.lits {
            let v = q.var().index();
            if !touched_mark[v] {
                touched_mark[v] = true;
                touched.push(q.var());
            }
            if Some(!q) == pivot {
                continue;
            }
            if !self.seen[v] {
                self.seen[v] = true;
                work.push(q);
            } else {
                debug_assert!(work.contains(&q), "tautological resolvent");
            }
        }
    }

    fn asserting(&self, mut work: Vec<Lit>, d: u32, touched: Vec<Var>) -> Analysis {
        let uip = work
            .iter()
            .position(|&l| !self.is_universal(l) && self.levels[l.var().index()] == d)
            .expect("asserting literal present");
        work.swap(0, uip);
        let mut backjump = 0;
        if work.len() > 1 {
            let (best, level) = work[1..]
                .iter()
                .enumerate()
                .map(|(i, l)| (i + 1, self.levels[l.var().index()]))
                .max_by_key(|&(i, lv)| (lv, std::cmp::Reverse(i)))
                .expect("non-empty");
            work.swap(1, best);
            backjump = level;
        }
        Analysis::Learned {
            lits: work,
            backjump,
            touched,
        }
    }
}
