//! And-inverter circuits, their Tseitin encoding, and the random "Boolean" 2QBF family.

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use super::{Clause, Lit, Origin, QbfFormula, Var};
use crate::rng::seeded;

/// Reference to a circuit node, possibly inverted. Nodes `0..num_inputs` are the inputs, node
/// `num_inputs + k` is gate `k`. Node `i` is encoded by variable `i + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Signal {
    pub node: u32,
    pub negated: bool,
}

impl Signal {
    pub fn new(node: u32, negated: bool) -> Signal {
        Signal { node, negated }
    }

    pub fn lit(self) -> Lit {
        Var::new(self.node + 1).lit(!self.negated)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AndGate {
    pub a: Signal,
    pub b: Signal,
}

/// An acyclic and-inverter circuit: every gate reads strictly earlier nodes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Circuit {
    pub num_inputs: u32,
    pub gates: Vec<AndGate>,
    /// The node asserted true by the encoding.
    pub output: Signal,
    /// Clauses appended verbatim after the gate encoding.
    pub extra_clauses: Vec<Vec<Lit>>,
}

impl Circuit {
    pub fn num_nodes(&self) -> u32 {
        self.num_inputs + self.gates.len() as u32
    }

    /// Evaluates every node under an input assignment.
    pub fn simulate(&self, inputs: &[bool]) -> Vec<bool> {
        assert_eq!(inputs.len(), self.num_inputs as usize);
        let mut values = inputs.to_vec();
        for gate in &self.gates {
            let read = |s: Signal, values: &[bool]| values[s.node as usize] != s.negated;
            let v = read(gate.a, &values) && read(gate.b, &values);
            values.push(v);
        }
        values
    }
}

/// Plain CNF over variables `1..=num_vars`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

/// Tseitin encoding: per gate `g = a ∧ b` the clauses `(¬g ∨ a)`, `(¬g ∨ b)`, `(g ∨ ¬a ∨ ¬b)`,
/// then the unit clause for the output, then the circuit's extra clauses. Clauses are emitted
/// raw; a gate reading the same node twice produces duplicate literals.
pub fn tseitin(circuit: &Circuit) -> Cnf {
    let mut clauses = Vec::with_capacity(3 * circuit.gates.len() + 1 + circuit.extra_clauses.len());
    for (k, gate) in circuit.gates.iter().enumerate() {
        let g = Signal::new(circuit.num_inputs + k as u32, false).lit();
        let (a, b) = (gate.a.lit(), gate.b.lit());
        debug_assert!(a.var() < g.var() && b.var() < g.var());
        clauses.push(vec![!g, a]);
        clauses.push(vec![!g, b]);
        clauses.push(vec![g, !a, !b]);
    }
    clauses.push(vec![circuit.output.lit()]);
    clauses.extend(circuit.extra_clauses.iter().cloned());
    Cnf {
        num_vars: circuit.num_nodes(),
        clauses,
    }
}

/// Parameters of the random-circuit family.
#[derive(Clone, Debug, PartialEq)]
pub struct BooleanFamilyConfig {
    pub num_inputs: u32,
    /// Inclusive range for the number of gates.
    pub gate_limit_range: (u32, u32),
    /// Random 3-literal clauses appended, as a fraction of the encoded clause count (rounded up).
    pub extra_clause_fraction: f64,
    /// How many circuit inputs become universally quantified.
    pub num_universals: u32,
}

impl Default for BooleanFamilyConfig {
    fn default() -> Self {
        BooleanFamilyConfig {
            num_inputs: 8,
            gate_limit_range: (10, 40),
            extra_clause_fraction: 0.05,
            num_universals: 4,
        }
    }
}

impl BooleanFamilyConfig {
    /// A configuration whose formulas stay at or below 18 variables, small enough for the
    /// brute-force oracle.
    pub fn small() -> Self {
        BooleanFamilyConfig {
            num_inputs: 6,
            gate_limit_range: (4, 12),
            extra_clause_fraction: 0.1,
            num_universals: 3,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("the circuit needs at least one input")]
    NoInputs,
    #[error("{universals} universals requested from {inputs} inputs")]
    TooManyUniversals { universals: u32, inputs: u32 },
    #[error("invalid gate range {0}..={1}")]
    GateRange(u32, u32),
}

/// Builds a random circuit: a gate count drawn from the configured range, each gate reading
/// two distinct earlier nodes (when at least two exist) with random polarity.
pub fn random_circuit(seed: u64, cfg: &BooleanFamilyConfig) -> Result<Circuit, GeneratorError> {
    validate(cfg)?;
    let mut rng = seeded(seed);
    let (lo, hi) = cfg.gate_limit_range;
    let num_gates = rng.random_range(lo..=hi);
    let mut gates = Vec::with_capacity(num_gates as usize);
    for k in 0..num_gates {
        let available = cfg.num_inputs + k;
        let a = rng.random_range(0..available);
        let b = if available > 1 {
            let b = rng.random_range(0..available - 1);
            if b >= a {
                b + 1
            } else {
                b
            }
        } else {
            a
        };
        gates.push(AndGate {
            a: Signal::new(a, rng.random()),
            b: Signal::new(b, rng.random()),
        });
    }
    let output = Signal::new(cfg.num_inputs + num_gates - 1, false);
    let output = if num_gates == 0 { Signal::new(0, false) } else { output };
    Ok(Circuit {
        num_inputs: cfg.num_inputs,
        gates,
        output,
        extra_clauses: Vec::new(),
    })
}

fn validate(cfg: &BooleanFamilyConfig) -> Result<(), GeneratorError> {
    if cfg.num_inputs == 0 {
        return Err(GeneratorError::NoInputs);
    }
    if cfg.num_universals > cfg.num_inputs {
        return Err(GeneratorError::TooManyUniversals {
            universals: cfg.num_universals,
            inputs: cfg.num_inputs,
        });
    }
    if cfg.gate_limit_range.0 > cfg.gate_limit_range.1 {
        return Err(GeneratorError::GateRange(cfg.gate_limit_range.0, cfg.gate_limit_range.1));
    }
    Ok(())
}

/// Generates one 2QBF of the random-circuit family. Deterministic in `(seed, cfg)`.
///
/// The circuit is Tseitin-encoded, `⌈fraction · m⌉` random 3-literal clauses over distinct
/// variables are appended (`m` = encoded clause count), and `num_universals` randomly chosen
/// circuit inputs are universally quantified. Everything else is existential.
pub fn generate_boolean_family(
    seed: u64,
    cfg: &BooleanFamilyConfig,
) -> Result<QbfFormula, GeneratorError> {
    let mut circuit = random_circuit(seed, cfg)?;
    // Independent stream for the clause noise and the prefix so the circuit shape depends on
    // the seed alone.
    let mut rng = seeded(crate::rng::derive_seed(seed, 1));
    let num_vars = circuit.num_nodes();
    let m = 3 * circuit.gates.len() + 1;
    let extra = (cfg.extra_clause_fraction * m as f64).ceil() as usize;
    let width = num_vars.min(3) as usize;
    for _ in 0..extra {
        let vars = index::sample(&mut rng, num_vars as usize, width);
        let clause = vars
            .iter()
            .map(|i| Var::from_index(i).lit(rng.random()))
            .collect();
        circuit.extra_clauses.push(clause);
    }
    let cnf = tseitin(&circuit);

    let mut universals: Vec<Var> = index::sample(&mut rng, cfg.num_inputs as usize, cfg.num_universals as usize)
        .iter()
        .map(Var::from_index)
        .collect();
    universals.sort();
    let existentials = (0..num_vars as usize)
        .map(Var::from_index)
        .filter(|v| universals.binary_search(v).is_err())
        .collect();
    let clauses = cnf
        .clauses
        .iter()
        .filter_map(|c| Clause::normalized(c, Origin::Original))
        .collect();
    Ok(QbfFormula::new(num_vars, universals, existentials, clauses)
        .expect("generator maintains formula invariants"))
}
