use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{io_err, DatasetEntry, HarnessError};
use crate::engine::{solve, Limits, UnknownReason, Verdict};
use crate::heuristics::{
    Heuristic, PolicyHeuristic, PolicyMode, RandomHeuristic, VsidsHeuristic,
};
use crate::neural::PolicyParams;
use crate::rng::derive_seed;

/// Version written in the `schema` column of every results row.
pub const RESULTS_SCHEMA: u32 = 1;

#[derive(Clone, Debug)]
pub enum HeuristicSpec {
    Random,
    Vsids,
    /// Greedy unless `sample` is set.
    Learned {
        params: Arc<PolicyParams>,
        sample: bool,
    },
}

impl HeuristicSpec {
    pub fn id(&self) -> &'static str {
        match self {
            HeuristicSpec::Random => "random",
            HeuristicSpec::Vsids => "vsids",
            HeuristicSpec::Learned { .. } => "learned",
        }
    }

    pub fn build(&self, seed: u64) -> Box<dyn Heuristic> {
        match self {
            HeuristicSpec::Random => Box::new(RandomHeuristic::new(seed)),
            HeuristicSpec::Vsids => Box::new(VsidsHeuristic::new()),
            HeuristicSpec::Learned { params, sample } => {
                let mode = if *sample {
                    PolicyMode::Sample(seed)
                } else {
                    PolicyMode::Greedy
                };
                Box::new(PolicyHeuristic::new(params.clone(), mode))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub file: String,
    pub sha256: String,
    pub heuristic: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub decisions: u64,
    pub conflicts: u64,
    pub unknown_reason: UnknownReason,
    /// Not part of the results file; zero when read back.
    pub wall_seconds: f64,
}

#[derive(Serialize, Deserialize)]
struct ResultRow {
    schema: u32,
    file: String,
    sha256: String,
    heuristic: String,
    seed: u64,
    verdict: String,
    decisions: u64,
    conflicts: u64,
    unknown_reason: String,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    file: &'a str,
    heuristic: &'a str,
    wall_seconds: f64,
}

/// Runs `heuristic` once per formula, in parallel. Formula `f` gets seed
/// `derive_seed(master_seed, f.seed_key())`, so results do not depend on dataset order.
pub fn eval_sweep(
    entries: &[DatasetEntry],
    heuristic: &HeuristicSpec,
    limits: Limits,
    master_seed: u64,
) -> Result<Vec<EvalResult>, HarnessError> {
    entries
        .par_iter()
        .map(|e| {
            let seed = derive_seed(master_seed, e.seed_key());
            let mut h = heuristic.build(seed);
            let out = solve(e.formula.clone(), &mut h, limits)
                .map_err(|err| HarnessError::Heuristic(format!("{}: {err}", e.name)))?;
            Ok(EvalResult {
                file: e.name.clone(),
                sha256: e.sha256.clone(),
                heuristic: heuristic.id().to_string(),
                seed,
                verdict: out.verdict,
                decisions: out.decisions_used,
                conflicts: out.conflicts,
                unknown_reason: out.reason_for_unknown,
                wall_seconds: out.elapsed.as_secs_f64(),
            })
        })
        .collect()
}

pub fn write_results(path: &Path, results: &[EvalResult]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in results {
        w.serialize(ResultRow {
            schema: RESULTS_SCHEMA,
            file: r.file.clone(),
            sha256: r.sha256.clone(),
            heuristic: r.heuristic.clone(),
            seed: r.seed,
            verdict: r.verdict.to_string(),
            decisions: r.decisions,
            conflicts: r.conflicts,
            unknown_reason: r.unknown_reason.to_string(),
        })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Wall-clock times, kept apart from the results so those stay reproducible byte for byte.
pub fn write_timing(path: &Path, results: &[EvalResult]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in results {
        w.serialize(TimingRow {
            file: &r.file,
            heuristic: &r.heuristic,
            wall_seconds: r.wall_seconds,
        })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<EvalResult>, HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize::<ResultRow>() {
        let row = row?;
        if row.schema != RESULTS_SCHEMA {
            return Err(HarnessError::Results(format!(
                "schema {} is not supported (expected {RESULTS_SCHEMA})",
                row.schema
            )));
        }
        out.push(EvalResult {
            verdict: row.verdict.parse().map_err(HarnessError::Results)?,
            unknown_reason: row.unknown_reason.parse().map_err(HarnessError::Results)?,
            file: row.file,
            sha256: row.sha256,
            heuristic: row.heuristic,
            seed: row.seed,
            decisions: row.decisions,
            conflicts: row.conflicts,
            wall_seconds: 0.0,
        });
    }
    Ok(out)
}

/// `(rank, decisions)` of the solved runs sorted by decisions, rank from 1.
pub fn cactus_series(results: &[EvalResult]) -> Vec<(usize, u64)> {
    let mut d: Vec<u64> = results
        .iter()
        .filter(|r| r.verdict != Verdict::Unknown)
        .map(|r| r.decisions)
        .collect();
    d.sort_unstable();
    d.into_iter().enumerate().map(|(i, x)| (i + 1, x)).collect()
}

pub fn write_series(mut out: impl Write, series: &[(usize, u64)]) -> std::io::Result<()> {
    for (rank, decisions) in series {
        writeln!(out, "{rank} {decisions}")?;
    }
    out.flush()
}
