use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::RunSummary;
use super::{ExperimentConfig, HarnessError};
use crate::learner::{log_file_name, train_run_with, RunOptions, RunRecord, TrainConfig};

pub const CONFIG_FILE: &str = "config.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOG_DIR: &str = "logs";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunnerOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    /// Reuse complete logs already in the output directory.
    pub resume: bool,
    pub trace_bonus: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Computed,
    Resumed,
    Failed,
}

/// Registry entry for one (cell, seed) unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub task: String,
    pub method: String,
    pub digest: String,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_success: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestCell {
    pub task: String,
    pub method: String,
    pub digest: String,
}

/// What an output directory contains, in config order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub cells: Vec<ManifestCell>,
    pub runs: Vec<RunEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        let text = read(&path)?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Corrupt {
            path,
            reason: e.to_string(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub manifest: Manifest,
    /// Records of successful runs, ordered by cell then seed.
    pub records: Vec<RunRecord>,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &RunEntry> {
        self.manifest.runs.iter().filter(|r| r.status == RunStatus::Failed)
    }

    pub fn count(&self, status: RunStatus) -> usize {
        self.manifest.runs.iter().filter(|r| r.status == status).count()
    }

    pub fn all_ok(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn summaries(&self) -> Vec<RunSummary> {
        let ok = self.manifest.runs.iter().filter(|r| r.status != RunStatus::Failed);
        ok.zip(&self.records)
            .map(|(entry, rec)| RunSummary::new(&entry.task, &entry.method, rec))
            .collect()
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write through a sibling temporary file so readers never see a torn file.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    let tmp = partial_path(path);
    fs::write(&tmp, contents).map_err(io(&tmp))?;
    fs::rename(&tmp, path).map_err(io(path))
}

/// `name.ext` becomes `name.partial.ext`.
fn partial_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => path.with_file_name(format!("{stem}.partial.{ext}")),
        None => path.with_file_name(format!("{stem}.partial")),
    }
}

/// A complete log from an earlier invocation, if one exists and parses.
fn existing(path: &Path, digest: &str, seed: u64) -> Option<RunRecord> {
    let text = fs::read_to_string(path).ok()?;
    let rec = RunRecord::from_jsonl(digest, seed, &text).ok()?;
    rec.final_success().is_some().then_some(rec)
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: RunnerOptions) -> Result<ExperimentOutcome, HarnessError> {
    run_experiment_with(cfg, opts, |_| {})
}

/// Runs every (cell, seed) once, persisting each log as `<digest>_<seed>.jsonl`
/// under `logs/`. A failed run leaves its partial log behind and does not stop
/// the others. `progress` is called as each run finishes, from worker threads.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, opts: RunnerOptions, progress: F) -> Result<ExperimentOutcome, HarnessError>
where
    F: Fn(&RunEntry) + Sync,
{
    cfg.validate()?;
    let logs = cfg.out_dir.join(LOG_DIR);
    fs::create_dir_all(&logs).map_err(|source| HarnessError::Io {
        path: logs.clone(),
        source,
    })?;
    write_atomic(&cfg.out_dir.join(CONFIG_FILE), &cfg.to_json())?;

    let units: Vec<(usize, u64)> = (0..cfg.cells.len())
        .flat_map(|c| cfg.seeds().map(move |s| (c, s)))
        .collect();
    let registry: Mutex<Vec<(usize, RunEntry, Option<RunRecord>)>> = Mutex::new(Vec::with_capacity(units.len()));

    let work = |&(c, seed): &(usize, u64)| -> Result<(), HarnessError> {
        let cell = &cfg.cells[c];
        let train = TrainConfig {
            seed,
            ..cell.train.clone()
        };
        let digest = train.digest();
        let path = logs.join(log_file_name(&digest, seed));
        let mut entry = RunEntry {
            task: cell.task.clone(),
            method: cell.method.clone(),
            digest: digest.clone(),
            seed,
            status: RunStatus::Computed,
            final_success: None,
            error: None,
        };
        let reused = if opts.resume { existing(&path, &digest, seed) } else { None };
        let record = match reused {
            Some(rec) => {
                entry.status = RunStatus::Resumed;
                Some(rec)
            }
            None => match train_run_with(
                &train,
                RunOptions {
                    trace_bonus: opts.trace_bonus,
                },
            ) {
                Ok(rec) => {
                    write_atomic(&path, &rec.to_jsonl())?;
                    Some(rec)
                }
                Err(failure) => {
                    let partial = partial_path(&path);
                    fs::write(&partial, failure.partial.to_jsonl()).map_err(|source| HarnessError::Io {
                        path: partial,
                        source,
                    })?;
                    entry.status = RunStatus::Failed;
                    entry.error = Some(failure.to_string());
                    None
                }
            },
        };
        entry.final_success = record.as_ref().and_then(RunRecord::final_success);
        progress(&entry);
        registry.lock().expect("registry lock").push((c, entry, record));
        Ok(())
    };

    let workers = opts.workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| units.par_iter().try_for_each(work))?;

    let mut done = registry.into_inner().expect("registry lock");
    done.sort_by_key(|(c, e, _)| (*c, e.seed));
    let manifest = Manifest {
        cells: cfg
            .cells
            .iter()
            .map(|c| ManifestCell {
                task: c.task.clone(),
                method: c.method.clone(),
                digest: c.digest(),
            })
            .collect(),
        runs: done.iter().map(|(_, e, _)| e.clone()).collect(),
    };
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&cfg.out_dir.join(MANIFEST_FILE), &body)?;
    Ok(ExperimentOutcome {
        manifest,
        records: done.into_iter().filter_map(|(_, _, r)| r).collect(),
    })
}

/// Summaries of the successful runs listed in a directory's manifest.
pub fn load_runs(dir: &Path) -> Result<Vec<RunSummary>, HarnessError> {
    let manifest = Manifest::load(dir)?;
    manifest
        .runs
        .iter()
        .filter(|r| r.status != RunStatus::Failed)
        .map(|r| {
            let path = dir.join(LOG_DIR).join(log_file_name(&r.digest, r.seed));
            let rec = RunRecord::from_jsonl(&r.digest, r.seed, &read(&path)?).map_err(|e| HarnessError::Corrupt {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            Ok(RunSummary::new(&r.task, &r.method, &rec))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_names() {
        assert_eq!(partial_path(Path::new("a/b_1.jsonl")), Path::new("a/b_1.partial.jsonl"));
        assert_eq!(partial_path(Path::new("a/report")), Path::new("a/report.partial"));
    }
}
