//! Prenex 2QBF formulas `∀X.∃Y.φ` with φ in CNF.
//!
//! This module holds the data model plus everything that produces or judges formulas without
//! running the search engine: QDIMACS parsing and writing, the random-circuit generator, and a
//! brute-force truth oracle used to cross-check the engine.

mod circuit;
mod literal;
mod oracle;
mod qdimacs;

pub use circuit::{
    generate_boolean_family, tseitin, AndGate, BooleanFamilyConfig, Circuit, Cnf, GeneratorError,
    Signal,
};
pub use literal::{Lit, Var};
pub use oracle::{oracle_truth, OracleCap, OracleError};
pub use qdimacs::{parse_qdimacs, write_qdimacs, ParseError};

use thiserror::Error;

/// Whether a clause came from the input or from conflict analysis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Origin {
    Original,
    Learned,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Quant {
    Universal,
    Existential,
}

/// A disjunction of literals.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    pub lits: Vec<Lit>,
    pub origin: Origin,
}

impl Clause {
    pub fn new(lits: Vec<Lit>, origin: Origin) -> Clause {
        Clause { lits, origin }
    }

    pub fn original(lits: Vec<Lit>) -> Clause {
        Clause::new(lits, Origin::Original)
    }

    /// Removes duplicate literals, keeping first occurrences in order. Returns `None` for a
    /// tautology (a clause containing both `l` and `¬l`).
    pub fn normalized(lits: &[Lit], origin: Origin) -> Option<Clause> {
        let mut out: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            if out.contains(&!l) {
                return None;
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Some(Clause::new(out, origin))
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_learned(&self) -> bool {
        self.origin == Origin::Learned
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable {0} is quantified twice")]
    DuplicateQuantifier(u32),
    #[error("variable {0} is out of range 1..={1}")]
    VarOutOfRange(u32, u32),
    #[error("variable {0} has no quantifier")]
    Unquantified(u32),
    #[error("clause {0} contains duplicate or complementary literals")]
    NotNormalized(usize),
}

/// A prenex 2QBF: one universal block followed by one existential block, and a clause list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QbfFormula {
    num_vars: u32,
    universals: Vec<Var>,
    existentials: Vec<Var>,
    clauses: Vec<Clause>,
    quant: Vec<Quant>,
}

impl QbfFormula {
    /// Checks that the two blocks partition `1..=num_vars`, that every literal is in range and
    /// that no clause holds duplicate or complementary literals.
    pub fn new(
        num_vars: u32,
        universals: Vec<Var>,
        existentials: Vec<Var>,
        clauses: Vec<Clause>,
    ) -> Result<QbfFormula, FormulaError> {
        let mut quant: Vec<Option<Quant>> = vec![None; num_vars as usize];
        for (block, q) in [(&universals, Quant::Universal), (&existentials, Quant::Existential)] {
            for &v in block {
                if v.number() > num_vars {
                    return Err(FormulaError::VarOutOfRange(v.number(), num_vars));
                }
                if quant[v.index()].replace(q).is_some() {
                    return Err(FormulaError::DuplicateQuantifier(v.number()));
                }
            }
        }
        let quant = quant
            .into_iter()
            .enumerate()
            .map(|(i, q)| q.ok_or(FormulaError::Unquantified(i as u32 + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, c) in clauses.iter().enumerate() {
            for (j, &l) in c.lits.iter().enumerate() {
                if l.var().number() > num_vars {
                    return Err(FormulaError::VarOutOfRange(l.var().number(), num_vars));
                }
                if c.lits[..j].iter().any(|&k| k.var() == l.var()) {
                    return Err(FormulaError::NotNormalized(i));
                }
            }
        }
        Ok(QbfFormula {
            num_vars,
            universals,
            existentials,
            clauses,
            quant,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn universals(&self) -> &[Var] {
        &self.universals
    }

    pub fn existentials(&self) -> &[Var] {
        &self.existentials
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn quant(&self, var: Var) -> Quant {
        self.quant[var.index()]
    }

    pub fn is_universal(&self, var: Var) -> bool {
        self.quant(var) == Quant::Universal
    }

    /// Same prefix, different matrix.
    pub fn with_clauses(&self, clauses: Vec<Clause>) -> Result<QbfFormula, FormulaError> {
        QbfFormula::new(
            self.num_vars,
            self.universals.clone(),
            self.existentials.clone(),
            clauses,
        )
    }
}
