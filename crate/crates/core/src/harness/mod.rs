//! Dataset preparation, evaluation sweeps and cactus series.

mod eval;

pub use eval::{
    cactus_series, eval_sweep, read_results, write_results, write_series, write_timing,
    EvalResult, HeuristicSpec, RESULTS_SCHEMA,
};

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::env::QbfEnv;
use crate::formula::{
    generate_boolean_family, parse_qdimacs, write_qdimacs, BooleanFamilyConfig, GeneratorError,
    QbfFormula,
};
use crate::rng::derive_seed;

pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{0}")]
    Heuristic(String),
    #[error("results file: {0}")]
    Results(String),
    #[error("manifest: {0}")]
    Manifest(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One formula of a dataset directory.
#[derive(Clone, Debug)]
pub struct DatasetEntry {
    /// File name relative to the dataset directory.
    pub name: String,
    /// Lowercase hex SHA-256 of the file bytes.
    pub sha256: String,
    pub formula: Arc<QbfFormula>,
}

impl DatasetEntry {
    pub fn from_bytes(name: String, bytes: &[u8]) -> Result<DatasetEntry, crate::formula::ParseError> {
        let formula = parse_qdimacs(bytes)?;
        Ok(DatasetEntry {
            name,
            sha256: sha256_hex(bytes),
            formula: Arc::new(formula),
        })
    }

    /// Seed key taken from the first eight hash bytes.
    pub fn seed_key(&self) -> u64 {
        u64::from_str_radix(&self.sha256[..16], 16).expect("hex digest")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadFailure {
    pub name: String,
    pub error: String,
}

pub fn is_formula_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("qdimacs" | "qdm" | "cnf")
    )
}

/// Parses every `.qdimacs`/`.qdm`/`.cnf` file of `dir`, in file-name order. Unreadable or
/// malformed files are reported, not fatal.
pub fn load_dir(dir: &Path) -> Result<(Vec<DatasetEntry>, Vec<LoadFailure>), HarnessError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_formula_file(p))
        .collect();
    paths.sort();
    let loaded: Vec<Result<DatasetEntry, LoadFailure>> = paths
        .par_iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let bytes = fs::read(p).map_err(|e| LoadFailure {
                name: name.clone(),
                error: e.to_string(),
            })?;
            DatasetEntry::from_bytes(name.clone(), &bytes).map_err(|e| LoadFailure {
                name,
                error: e.to_string(),
            })
        })
        .collect();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for r in loaded {
        match r {
            Ok(e) => entries.push(e),
            Err(f) => {
                log::warn!("skipping {}: {}", f.name, f.error);
                failures.push(f);
            }
        }
    }
    Ok((entries, failures))
}

/// Whether the solver finishes before its first decision.
pub fn is_trivial(formula: &Arc<QbfFormula>) -> bool {
    QbfEnv::default().reset(formula.clone()).is_terminal()
}

#[derive(Clone, Debug, Default)]
pub struct Split {
    pub kept: Vec<DatasetEntry>,
    pub removed: Vec<DatasetEntry>,
}

/// Partitions entries into those needing at least one decision and those that do not.
pub fn filter_trivial(entries: Vec<DatasetEntry>) -> Split {
    let trivial: Vec<bool> = entries.par_iter().map(|e| is_trivial(&e.formula)).collect();
    let mut split = Split::default();
    for (e, t) in entries.into_iter().zip(trivial) {
        if t {
            split.removed.push(e);
        } else {
            split.kept.push(e);
        }
    }
    split
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub sha256: String,
    /// `kept`, `removed` or `unreadable`.
    pub status: String,
}

pub fn manifest_rows(split: &Split, failures: &[LoadFailure]) -> Vec<ManifestRow> {
    let row = |e: &DatasetEntry, status: &str| ManifestRow {
        file: e.name.clone(),
        sha256: e.sha256.clone(),
        status: status.to_string(),
    };
    let mut rows: Vec<ManifestRow> = split
        .kept
        .iter()
        .map(|e| row(e, "kept"))
        .chain(split.removed.iter().map(|e| row(e, "removed")))
        .chain(failures.iter().map(|f| ManifestRow {
            file: f.name.clone(),
            sha256: String::new(),
            status: "unreadable".to_string(),
        }))
        .collect();
    rows.sort_by(|a, b| a.file.cmp(&b.file));
    rows
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Loads a dataset directory for training or evaluation. With a manifest, only its `kept` files
/// are used and their hashes must match; without one, trivial formulas are dropped on the fly.
pub fn load_dataset(dir: &Path) -> Result<Vec<DatasetEntry>, HarnessError> {
    let (entries, _) = load_dir(dir)?;
    let manifest = dir.join(MANIFEST_NAME);
    let kept = if manifest.is_file() {
        let rows = read_manifest(&manifest)?;
        let mut kept = Vec::new();
        for e in entries {
            if let Some(r) = rows.iter().find(|r| r.file == e.name) {
                if r.sha256 != e.sha256 {
                    return Err(HarnessError::Manifest(format!(
                        "{} does not match its manifest hash",
                        e.name
                    )));
                }
                if r.status == "kept" {
                    kept.push(e);
                }
            }
        }
        kept
    } else {
        filter_trivial(entries).kept
    };
    if kept.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    Ok(kept)
}

/// Writes `count` generated formulas as `gen-NNNNN.qdimacs`; formula `i` uses seed
/// `derive_seed(seed, i)`. Returns the written paths.
pub fn generate_dataset(
    cfg: &BooleanFamilyConfig,
    seed: u64,
    count: usize,
    out: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let f = generate_boolean_family(derive_seed(seed, i as u64), cfg)?;
        let path = out.join(format!("gen-{i:05}.qdimacs"));
        fs::write(&path, write_qdimacs(&f)).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests;
