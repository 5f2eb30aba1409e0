use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AdamState, TrainError, UpdateStats};
use crate::neural::{load_params, save_params, PolicyParams};

/// Trainer progress, enough to continue the same seed stream.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub env_steps: u64,
    pub updates: u64,
    /// Episodes started, including ones with no decisions.
    pub episodes: u64,
    pub epoch: u64,
    /// Formulas already drawn from the current epoch's order.
    pub position: usize,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    seed: u64,
    counters: Counters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    adam_steps: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: PolicyParams,
    pub counters: Counters,
    pub seed: u64,
    pub adam: Option<AdamState>,
}

impl Checkpoint {
    pub fn sidecar_path(weights: &Path) -> PathBuf {
        with_suffix(weights, ".json")
    }

    /// Writes the weight file at `path` and the counters next to it as `<path>.json`.
    /// Adam moments, if any, go to `<path>.adam-m` and `<path>.adam-v`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TrainError> {
        let path = path.as_ref();
        save_params(&self.params, path)?;
        if let Some(adam) = &self.adam {
            save_params(&adam.m, with_suffix(path, ".adam-m"))?;
            save_params(&adam.v, with_suffix(path, ".adam-v"))?;
        }
        let sidecar = Sidecar {
            seed: self.seed,
            counters: self.counters.clone(),
            adam_steps: self.adam.as_ref().map(|a| a.t),
        };
        let file = File::create(Self::sidecar_path(path))?;
        serde_json::to_writer_pretty(file, &sidecar)
            .map_err(|e| TrainError::Checkpoint(e.to_string()))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint, TrainError> {
        let path = path.as_ref();
        let params = load_params(path)?;
        let file = File::open(Self::sidecar_path(path))?;
        let sidecar: Sidecar =
            serde_json::from_reader(file).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
        let adam = match sidecar.adam_steps {
            Some(t) => Some(AdamState {
                m: load_params(with_suffix(path, ".adam-m"))?,
                v: load_params(with_suffix(path, ".adam-v"))?,
                t,
            }),
            None => None,
        };
        Ok(Checkpoint {
            params,
            counters: sidecar.counters,
            seed: sidecar.seed,
            adam,
        })
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub env_steps: u64,
    pub mean_return: f64,
    pub solve_rate: f64,
    pub mean_decisions: f64,
    pub grad_norm: f64,
}

impl From<&UpdateStats> for MetricsRow {
    fn from(s: &UpdateStats) -> Self {
        MetricsRow {
            env_steps: s.env_steps,
            mean_return: s.mean_return,
            solve_rate: s.solve_rate,
            mean_decisions: s.mean_decisions,
            grad_norm: s.grad_norm,
        }
    }
}

/// Append-only metrics CSV. The header is written only when the file starts empty.
pub struct MetricsWriter {
    writer: csv::Writer<File>,
}

impl MetricsWriter {
    pub fn open(path: impl AsRef<Path>) -> Result<MetricsWriter, TrainError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let fresh = file.metadata()?.len() == 0;
        let writer = csv::WriterBuilder::new()
            .has_headers(fresh)
            .from_writer(file);
        Ok(MetricsWriter { writer })
    }

    pub fn append(&mut self, row: &MetricsRow) -> Result<(), TrainError> {
        self.writer.serialize(row)?;
        self.writer.flush()?;
        Ok(())
    }
}
