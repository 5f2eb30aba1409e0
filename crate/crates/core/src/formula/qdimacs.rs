//! QDIMACS reading and writing.
//!
//! ```text
//! c optional comments
//! p cnf <num_variables> <num_clauses>
//! a 1 0
//! e 2 0
//! 1 2 0
//! -1 2 0
//! ```
//!
//! Only prefixes of the shape `a* e*` are accepted. Consecutive lines of the same quantifier
//! are merged, unquantified variables join the existential block, duplicate literals are merged
//! and tautological clauses are dropped. The header clause count is checked against the clause
//! lines as written, before tautologies are dropped.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Clause, Lit, Origin, QbfFormula, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("input is not ASCII text")]
    NotText,
    #[error("line {line}: expected header `p cnf <vars> <clauses>`")]
    Header { line: usize },
    #[error("missing header")]
    MissingHeader,
    #[error("line {line}: invalid token `{token}`")]
    Token { line: usize, token: String },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: variable index 0 inside a clause")]
    ZeroInClause { line: usize },
    #[error("line {line}: missing terminating 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: variable {var} exceeds the declared {max} variables")]
    VarOutOfRange { line: usize, var: u32, max: u32 },
    #[error("line {line}: variable {var} appears in two quantifier blocks")]
    DuplicateQuantifier { line: usize, var: u32 },
    #[error("line {line}: quantifier lines must precede all clauses")]
    QuantifierAfterClauses { line: usize },
    #[error("line {line}: only `forall exists` prefixes are supported")]
    UnsupportedPrefix { line: usize },
    #[error("header declares {declared} clauses but {found} were given")]
    ClauseCount { declared: usize, found: usize },
}

/// Parses a QDIMACS document.
pub fn parse_qdimacs(input: &[u8]) -> Result<QbfFormula, ParseError> {
    if !input.is_ascii() {
        return Err(ParseError::NotText);
    }
    let text = std::str::from_utf8(input).map_err(|_| ParseError::NotText)?;

    let mut header: Option<(u32, usize)> = None;
    let mut universals: Vec<Var> = Vec::new();
    let mut existentials: Vec<Var> = Vec::new();
    let mut quantified: Vec<bool> = Vec::new();
    let mut seen_existential_block = false;
    let mut clause_lines = 0usize;
    let mut clauses: Vec<Clause> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('c') {
            continue;
        }
        let Some((num_vars, _)) = header else {
            header = Some(parse_header(content, line)?);
            quantified = vec![false; header.unwrap().0 as usize];
            continue;
        };

        let mut tokens = content.split_whitespace();
        let first = tokens.clone().next().unwrap_or_default();
        if first == "a" || first == "e" {
            tokens.next();
            if clause_lines > 0 {
                return Err(ParseError::QuantifierAfterClauses { line });
            }
            let universal = first == "a";
            if universal && seen_existential_block {
                return Err(ParseError::UnsupportedPrefix { line });
            }
            seen_existential_block |= !universal;
            for number in parse_terminated(tokens, line)? {
                if number <= 0 {
                    return Err(ParseError::Token {
                        line,
                        token: number.to_string(),
                    });
                }
                let var = number as u32;
                if var > num_vars {
                    return Err(ParseError::VarOutOfRange {
                        line,
                        var,
                        max: num_vars,
                    });
                }
                let var = Var::new(var);
                if std::mem::replace(&mut quantified[var.index()], true) {
                    return Err(ParseError::DuplicateQuantifier {
                        line,
                        var: var.number(),
                    });
                }
                if universal {
                    universals.push(var);
                } else {
                    existentials.push(var);
                }
            }
            continue;
        }

        clause_lines += 1;
        let numbers = parse_terminated(tokens, line)?;
        if numbers.is_empty() {
            return Err(ParseError::EmptyClause { line });
        }
        let mut lits = Vec::with_capacity(numbers.len());
        for n in numbers {
            let lit = Lit::from_dimacs(n).expect("terminator already stripped");
            if lit.var().number() > num_vars {
                return Err(ParseError::VarOutOfRange {
                    line,
                    var: lit.var().number(),
                    max: num_vars,
                });
            }
            lits.push(lit);
        }
        if let Some(clause) = Clause::normalized(&lits, Origin::Original) {
            clauses.push(clause);
        }
    }

    let (num_vars, declared) = header.ok_or(ParseError::MissingHeader)?;
    if declared != clause_lines {
        return Err(ParseError::ClauseCount {
            declared,
            found: clause_lines,
        });
    }
    for (index, q) in quantified.iter().enumerate() {
        if !q {
            existentials.push(Var::from_index(index));
        }
    }
    Ok(QbfFormula::new(num_vars, universals, existentials, clauses)
        .expect("parser maintains formula invariants"))
}

fn parse_header(content: &str, line: usize) -> Result<(u32, usize), ParseError> {
    let fields: Vec<&str> = content.split_whitespace().collect();
    match fields.as_slice() {
        ["p", "cnf", vars, clauses] => {
            let vars = vars.parse().map_err(|_| ParseError::Header { line })?;
            let clauses = clauses.parse().map_err(|_| ParseError::Header { line })?;
            Ok((vars, clauses))
        }
        _ => Err(ParseError::Header { line }),
    }
}

/// Reads integers up to the terminating 0, which must be the last token on the line.
fn parse_terminated<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<Vec<i32>, ParseError> {
    let mut out = Vec::new();
    let mut terminated = false;
    for token in tokens {
        let n: i32 = token.parse().map_err(|_| ParseError::Token {
            line,
            token: token.to_string(),
        })?;
        if terminated {
            return Err(ParseError::ZeroInClause { line });
        }
        if n == 0 {
            terminated = true;
        } else {
            out.push(n);
        }
    }
    if !terminated {
        return Err(ParseError::MissingTerminator { line });
    }
    Ok(out)
}

/// Serializes a formula: header, one `a` line, one `e` line (empty blocks omitted), then the
/// clauses in stored order. Clause origins are not represented in the format.
pub fn write_qdimacs(f: &QbfFormula) -> Vec<u8> {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses()).unwrap();
    for (tag, block) in [("a", f.universals()), ("e", f.existentials())] {
        if block.is_empty() {
            continue;
        }
        out.push_str(tag);
        for v in block {
            write!(out, " {v}").unwrap();
        }
        out.push_str(" 0\n");
    }
    for c in f.clauses() {
        for l in &c.lits {
            write!(out, "{l} ").unwrap();
        }
        out.push_str("0\n");
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 2 0\n";

    fn dimacs(f: &QbfFormula) -> Vec<Vec<i32>> {
        f.clauses()
            .iter()
            .map(|c| c.lits.iter().map(|l| l.to_dimacs()).collect())
            .collect()
    }

    #[test]
    fn listing_parses() {
        let f = parse_qdimacs(LISTING.as_bytes()).unwrap();
        assert_eq!(f.universals(), &[Var::new(1)]);
        assert_eq!(f.existentials(), &[Var::new(2)]);
        assert_eq!(dimacs(&f), vec![vec![1, 2], vec![-1, 2]]);
    }

    #[test]
    fn listing_round_trips_byte_identical() {
        let f = parse_qdimacs(LISTING.as_bytes()).unwrap();
        assert_eq!(String::from_utf8(write_qdimacs(&f)).unwrap(), LISTING);
    }

    #[test]
    fn unit_instance() {
        let f = parse_qdimacs(b"p cnf 1 1\ne 1 0\n1 0\n").unwrap();
        assert_eq!(f.existentials(), &[Var::new(1)]);
        assert_eq!(dimacs(&f), vec![vec![1]]);
    }

    #[test]
    fn empty_formula() {
        let f = parse_qdimacs(b"p cnf 0 0\n").unwrap();
        assert_eq!(write_qdimacs(&f), b"p cnf 0 0\n");
    }

    #[test]
    fn comments_and_blank_lines() {
        let f = parse_qdimacs(b"c hello\n\nc world\np cnf 2 1\ne 1 2 0\n1 -2 0\n").unwrap();
        assert_eq!(f.num_clauses(), 1);
    }

    #[test]
    fn error_cases() {
        let cases: &[(&str, ParseError)] = &[
            ("p cnf 1 1\ne 1 0\n0\n", ParseError::EmptyClause { line: 3 }),
            (
                "p cnf 2 2\n1 2 0\n",
                ParseError::ClauseCount {
                    declared: 2,
                    found: 1,
                },
            ),
            ("p cnf 2 1\n1 0 2 0\n", ParseError::ZeroInClause { line: 2 }),
            (
                "p cnf 2 1\na 1 0\ne 1 2 0\n1 2 0\n",
                ParseError::DuplicateQuantifier { line: 3, var: 1 },
            ),
            (
                "p cnf 2 1\n1 3 0\n",
                ParseError::VarOutOfRange {
                    line: 2,
                    var: 3,
                    max: 2,
                },
            ),
            ("p cnf 2 1\n1 2\n", ParseError::MissingTerminator { line: 2 }),
            ("1 2 0\n", ParseError::Header { line: 1 }),
            ("", ParseError::MissingHeader),
            (
                "p cnf 2 1\ne 1 0\na 2 0\n1 2 0\n",
                ParseError::UnsupportedPrefix { line: 3 },
            ),
            (
                "p cnf 2 1\n1 2 0\ne 1 0\n",
                ParseError::QuantifierAfterClauses { line: 3 },
            ),
        ];
        for (text, expected) in cases {
            assert_eq!(&parse_qdimacs(text.as_bytes()).unwrap_err(), expected, "{text:?}");
        }
    }

    #[test]
    fn unquantified_variables_become_existential() {
        let f = parse_qdimacs(b"p cnf 3 1\na 2 0\n1 2 3 0\n").unwrap();
        assert_eq!(f.universals(), &[Var::new(2)]);
        assert_eq!(f.existentials(), &[Var::new(1), Var::new(3)]);
    }

    #[test]
    fn repeated_blocks_merge() {
        let f = parse_qdimacs(b"p cnf 4 1\na 1 0\na 2 0\ne 3 0\ne 4 0\n1 4 0\n").unwrap();
        assert_eq!(f.universals().len(), 2);
        assert_eq!(f.existentials().len(), 2);
    }

    #[test]
    fn tautologies_dropped_but_counted() {
        let f = parse_qdimacs(b"p cnf 2 2\ne 1 2 0\n1 -1 0\n2 2 1 0\n").unwrap();
        assert_eq!(dimacs(&f), vec![vec![2, 1]]);
    }
}
