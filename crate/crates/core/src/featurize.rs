//! Observations: the literal–clause graph of the current clause store plus labels, global solver
//! state and the action mask.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::engine::Solver;

pub const LITERAL_LABELS: usize = 7;
pub const CLAUSE_LABELS: usize = 1;
pub const GLOBAL_FEATURES: usize = 5;

/// Bipartite occurrence graph between literals (index `2(v-1)+neg`) and clauses.
///
/// Rows are shared between snapshots: appending a clause only replaces the rows of its
/// literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyStructure {
    num_vars: usize,
    /// Sorted literal indices per clause.
    clause_lits: Vec<Arc<[u32]>>,
    /// Sorted clause indices per literal.
    lit_clauses: Vec<Arc<[u32]>>,
    /// Solver clause ids, to detect which clauses are new.
    clause_ids: Vec<u64>,
    num_edges: usize,
    clause_version: u64,
    deletion_epoch: u64,
}

impl AdjacencyStructure {
    /// Full rebuild from the solver's clause store.
    pub fn build(solver: &Solver) -> AdjacencyStructure {
        let n = solver.num_vars();
        let mut lit_clauses: Vec<Vec<u32>> = vec![Vec::new(); 2 * n];
        let mut clause_lits = Vec::with_capacity(solver.clauses().len());
        let mut clause_ids = Vec::with_capacity(solver.clauses().len());
        let mut num_edges = 0;
        for (ci, c) in solver.clauses().iter().enumerate() {
            let row = sorted_row(c.clause.lits.iter().map(|l| l.index() as u32));
            for &l in row.iter() {
                lit_clauses[l as usize].push(ci as u32);
            }
            num_edges += row.len();
            clause_lits.push(row);
            clause_ids.push(c.id);
        }
        AdjacencyStructure {
            num_vars: n,
            clause_lits,
            lit_clauses: lit_clauses.into_iter().map(Arc::from).collect(),
            clause_ids,
            num_edges,
            clause_version: solver.clause_version(),
            deletion_epoch: solver.deletion_epoch(),
        }
    }

    /// Builds the graph of an explicit clause list (literal indices), outside any solver.
    pub fn from_clauses(num_vars: usize, clauses: &[Vec<u32>]) -> AdjacencyStructure {
        let mut lit_clauses: Vec<Vec<u32>> = vec![Vec::new(); 2 * num_vars];
        let mut clause_lits = Vec::with_capacity(clauses.len());
        let mut num_edges = 0;
        for (ci, c) in clauses.iter().enumerate() {
            let row = sorted_row(c.iter().copied());
            assert!(row.windows(2).all(|w| w[0] < w[1]), "duplicate literal in clause {ci}");
            for &l in row.iter() {
                lit_clauses[l as usize].push(ci as u32);
            }
            num_edges += row.len();
            clause_lits.push(row);
        }
        AdjacencyStructure {
            num_vars,
            clause_lits,
            lit_clauses: lit_clauses.into_iter().map(Arc::from).collect(),
            clause_ids: (0..clauses.len() as u64).collect(),
            num_edges,
            clause_version: 0,
            deletion_epoch: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_literals(&self) -> usize {
        2 * self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clause_lits.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn clause(&self, c: usize) -> &[u32] {
        &self.clause_lits[c]
    }

    pub fn clauses(&self) -> impl Iterator<Item = &[u32]> {
        self.clause_lits.iter().map(|r| &r[..])
    }

    pub fn occurrences(&self, lit: usize) -> &[u32] {
        &self.lit_clauses[lit]
    }

    /// `(literal, clause)` pairs ordered by clause, then literal.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.clause_lits
            .iter()
            .enumerate()
            .flat_map(|(c, row)| row.iter().map(move |&l| (l, c as u32)))
    }

    pub fn clause_version(&self) -> u64 {
        self.clause_version
    }

    /// Shares rows with `self` where possible.
    fn appended(&self, solver: &Solver) -> AdjacencyStructure {
        let start = self.clause_lits.len();
        let mut clause_lits = self.clause_lits.clone();
        let mut clause_ids = self.clause_ids.clone();
        let mut added: Vec<Vec<u32>> = vec![Vec::new(); 2 * self.num_vars];
        let mut num_edges = self.num_edges;
        for (ci, c) in solver.clauses().iter().enumerate().skip(start) {
            let row = sorted_row(c.clause.lits.iter().map(|l| l.index() as u32));
            for &l in row.iter() {
                added[l as usize].push(ci as u32);
            }
            num_edges += row.len();
            clause_lits.push(row);
            clause_ids.push(c.id);
        }
        let lit_clauses = self
            .lit_clauses
            .iter()
            .zip(added)
            .map(|(old, new)| {
                if new.is_empty() {
                    old.clone()
                } else {
                    old.iter().chain(&new).copied().collect()
                }
            })
            .collect();
        AdjacencyStructure {
            num_vars: self.num_vars,
            clause_lits,
            lit_clauses,
            clause_ids,
            num_edges,
            clause_version: solver.clause_version(),
            deletion_epoch: solver.deletion_epoch(),
        }
    }
}

fn sorted_row(lits: impl Iterator<Item = u32>) -> Arc<[u32]> {
    let mut row: Vec<u32> = lits.collect();
    row.sort_unstable();
    row.into()
}

/// Adjacency of the solver's current clause store, reusing `previous` when the store has not
/// changed or has only grown since.
pub fn adjacency_delta(
    previous: Option<&Arc<AdjacencyStructure>>,
    solver: &Solver,
) -> Arc<AdjacencyStructure> {
    let Some(prev) = previous else {
        return Arc::new(AdjacencyStructure::build(solver));
    };
    let same_store = prev.num_vars == solver.num_vars()
        && prev.deletion_epoch == solver.deletion_epoch()
        && prev.clause_lits.len() <= solver.clauses().len()
        && prev
            .clause_ids
            .last()
            .is_none_or(|&id| solver.clauses()[prev.clause_ids.len() - 1].id == id);
    if !same_store {
        return Arc::new(AdjacencyStructure::build(solver));
    }
    if prev.clause_version == solver.clause_version() {
        return Arc::clone(prev);
    }
    Arc::new(prev.appended(solver))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub adjacency: Arc<AdjacencyStructure>,
    /// One row per literal; both literals of a variable share the variable's labels:
    /// universal, existential, assigned, implied true, implied false, decided true,
    /// decided false.
    pub literal_labels: Vec<[f64; LITERAL_LABELS]>,
    /// 1 for learned clauses.
    pub clause_labels: Vec<f64>,
    /// Decision level, restarts, restarts since the last major restart, conflicts until the
    /// next restart, fraction of assigned variables. Unscaled.
    pub global_state: [f64; GLOBAL_FEATURES],
    pub mask: Vec<bool>,
}

impl Observation {
    pub fn num_legal(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Text dump with a fixed layout, for golden tests and debugging.
    pub fn dump(&self) -> String {
        let adj = &self.adjacency;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "observation vars {} literals {} clauses {} edges {}",
            adj.num_vars(),
            adj.num_literals(),
            adj.num_clauses(),
            adj.num_edges()
        );
        for (c, row) in adj.clauses().enumerate() {
            let lits: Vec<String> = row.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "clause {c} label {} lits {}", self.clause_labels[c], lits.join(" "));
        }
        for (l, labels) in self.literal_labels.iter().enumerate() {
            let ys: Vec<String> = labels.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "literal {l} mask {} labels {}", u8::from(self.mask[l]), ys.join(" "));
        }
        let g: Vec<String> = self.global_state.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "global {}", g.join(" "));
        out
    }
}

/// Labels, state and mask for `solver` over the given adjacency.
pub fn observe_with(adjacency: Arc<AdjacencyStructure>, solver: &Solver) -> Observation {
    let n = solver.num_vars();
    let formula = solver.formula();
    let mut literal_labels = vec![[0.0; LITERAL_LABELS]; 2 * n];
    for v in 0..n {
        let var = crate::formula::Var::from_index(v);
        let mut y = [0.0; LITERAL_LABELS];
        if formula.is_universal(var) {
            y[0] = 1.0;
        } else {
            y[1] = 1.0;
        }
        if let Some(value) = solver.value(var) {
            y[2] = 1.0;
            let slot = match (solver.is_decision(var), value) {
                (false, true) => 3,
                (false, false) => 4,
                (true, true) => 5,
                (true, false) => 6,
            };
            y[slot] = 1.0;
        }
        literal_labels[2 * v] = y;
        literal_labels[2 * v + 1] = y;
    }
    let clause_labels = solver
        .clauses()
        .iter()
        .map(|c| if c.clause.is_learned() { 1.0 } else { 0.0 })
        .collect();
    let mut mask = vec![false; 2 * n];
    for l in solver.legal_actions() {
        mask[l.index()] = true;
    }
    let global_state = [
        f64::from(solver.decision_level()),
        solver.restarts() as f64,
        solver.restarts_since_major() as f64,
        solver.conflicts_until_restart() as f64,
        if n == 0 {
            0.0
        } else {
            solver.num_assigned() as f64 / n as f64
        },
    ];
    Observation {
        adjacency,
        literal_labels,
        clause_labels,
        global_state,
        mask,
    }
}

/// Observation from scratch.
pub fn build_observation(solver: &Solver) -> Observation {
    observe_with(Arc::new(AdjacencyStructure::build(solver)), solver)
}

/// Builds observations along one trajectory, maintaining the adjacency incrementally.
#[derive(Clone, Debug, Default)]
pub struct Featurizer {
    adjacency: Option<Arc<AdjacencyStructure>>,
}

impl Featurizer {
    pub fn new() -> Featurizer {
        Featurizer::default()
    }

    pub fn observe(&mut self, solver: &Solver) -> Observation {
        let adjacency = adjacency_delta(self.adjacency.as_ref(), solver);
        self.adjacency = Some(Arc::clone(&adjacency));
        observe_with(adjacency, solver)
    }
}
