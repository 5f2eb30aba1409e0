//! Watched-literal propagation with the 2QBF universal reduction rule.
//!
//! Every clause of length ≥ 2 watches the literals at positions 0 and 1, at least one of which is
//! existential. A clause needs attention only when it has no true literal and either
//!
//! * no non-false existential literal (conflict: the universals left can be set false), or
//! * exactly one non-false literal, which is existential (unit).
//!
//! When a watched literal becomes false the watch moves to another non-false literal, which must
//! be existential unless the other watch is a non-false existential.

use super::{ClauseRef, Solver};

impl Solver {
    /// Runs propagation to fixpoint and returns the conflicting clause, if any.
    pub(super) fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let falsified = !self.trail[self.qhead];
            self.qhead += 1;

            let mut watchers = std::mem::take(&mut self.watches[falsified.index()]);
            let mut keep = 0;
            let mut conflict = None;
            let mut i = 0;
            while i < watchers.len() {
                let cref = watchers[i];
                i += 1;
                match self.visit(cref, falsified) {
                    Visit::Keep => {
                        watchers[keep] = cref;
                        keep += 1;
                    }
                    Visit::Moved => {}
                    Visit::Conflict => {
                        watchers[keep] = cref;
                        keep += 1;
                        conflict = Some(cref);
                        break;
                    }
                }
            }
            // Watchers not visited because of a conflict stay in place.
            while i < watchers.len() {
                watchers[keep] = watchers[i];
                keep += 1;
                i += 1;
            }
            watchers.truncate(keep);
            debug_assert!(self.watches[falsified.index()].is_empty());
            self.watches[falsified.index()] = watchers;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn visit(&mut self, cref: ClauseRef, falsified: crate::formula::Lit) -> Visit {
        let clause = &mut self.clauses[cref as usize].clause.lits;
        if clause[0] == falsified {
            clause.swap(0, 1);
        }
        debug_assert_eq!(clause[1], falsified);
        let other = clause[0];
        let values = &self.values;
        let formula = &self.formula;
        let value = |l: crate::formula::Lit| values[l.var().index()].map(|v| l.eval(v));
        let other_value = value(other);
        if other_value == Some(true) {
            return Visit::Keep;
        }
        let other_good = other_value.is_none() && !formula.is_universal(other.var());

        let mut replacement = None;
        for (k, &l) in clause.iter().enumerate().skip(2) {
            match value(l) {
                // A true literal is assigned no later than `falsified`, so the clause stays
                // satisfied for as long as the stale watch is false.
                Some(true) => return Visit::Keep,
                Some(false) => {}
                None => {
                    if other_good || !formula.is_universal(l.var()) {
                        replacement = Some(k);
                        break;
                    }
                }
            }
        }
        if let Some(k) = replacement {
            clause.swap(1, k);
            let new_watch = clause[1];
            self.watches[new_watch.index()].push(cref);
            return Visit::Moved;
        }
        if other_good {
            // Every other literal is false: unit.
            self.assign(other, Some(cref));
            Visit::Keep
        } else {
            Visit::Conflict
        }
    }
}

enum Visit {
    Keep,
    Moved,
    Conflict,
}
