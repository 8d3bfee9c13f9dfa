//! Experiment orchestration.
//!
//! An [`ExperimentConfig`] lists cells (a task and a method, each with a full
//! trainer setup) and a seed count. [`run_experiment`] runs every (cell, seed)
//! pair on a worker pool, writes one JSONL log per run, and records the
//! outcome in `manifest.json`; [`emit_report`] turns final evaluation success
//! into mean, median and IQM estimates with stratified bootstrap intervals.
//!
//! Output directory layout:
//!
//! ```text
//! config.json    the resolved config
//! manifest.json  cells and per-run status
//! logs/          <digest>_<seed>.jsonl, plus .partial.jsonl for failed runs
//! report.csv     cell,metric,point,ci_low,ci_high
//! summary.md     the same as a table
//! curves.csv     task,method,seed,step,success
//! ```

mod config;
mod report;
mod runner;
pub mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{CellConfig, ExperimentConfig, GridMethod, GridTask};
pub use report::{
    aggregate, curves_csv, emit_report, AggregateOptions, AggregateReport, ReportRow, RunSummary, CURVES_FILE,
    CURVES_HEADER, POOLED, REPORT_FILE, REPORT_HEADER, SUMMARY_FILE,
};
pub use runner::{
    load_runs, run_experiment, run_experiment_with, ExperimentOutcome, Manifest, ManifestCell, RunEntry,
    RunStatus, RunnerOptions, CONFIG_FILE, LOG_DIR, MANIFEST_FILE,
};
pub use stats::{iqm, mean, median, stratified_bootstrap_ci, Metric};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("no scores to aggregate")]
    EmptyScores,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
}
