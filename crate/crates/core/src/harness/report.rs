use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::write_atomic;
use super::stats::{stratified_bootstrap_ci, Metric};
use super::HarnessError;
use crate::learner::{EvalPoint, RunRecord};
use crate::rng::{sub_stream, Stream};

pub const REPORT_FILE: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.md";
pub const CURVES_FILE: &str = "curves.csv";
pub const REPORT_HEADER: &str = "cell,metric,point,ci_low,ci_high";
pub const CURVES_HEADER: &str = "task,method,seed,step,success";

/// What aggregation needs from one finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub task: String,
    pub method: String,
    pub seed: u64,
    pub evals: Vec<EvalPoint>,
}

impl RunSummary {
    pub fn new(task: &str, method: &str, rec: &RunRecord) -> Self {
        RunSummary {
            task: task.to_string(),
            method: method.to_string(),
            seed: rec.seed,
            evals: rec.evals(),
        }
    }

    pub fn final_success(&self) -> Option<f64> {
        self.evals.last().map(|e| e.success)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// `task/method` for a single cell, `all/method` pooled over tasks.
    pub cell: String,
    pub metric: Metric,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub rows: Vec<ReportRow>,
    pub n_bootstrap: usize,
    pub confidence: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateOptions {
    pub n_bootstrap: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions {
            n_bootstrap: 2000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

/// Name of the pseudo-task holding the pooled rows.
pub const POOLED: &str = "all";

/// Per-cell and per-method (pooled over tasks, stratified by task) estimates
/// of final success. Cells keep their first-seen order.
pub fn aggregate(runs: &[RunSummary], metrics: &[Metric], opts: AggregateOptions) -> Result<AggregateReport, HarnessError> {
    if runs.is_empty() || metrics.is_empty() {
        return Err(HarnessError::EmptyScores);
    }
    let mut cells: Vec<(String, String)> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    let mut scores: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in runs {
        let key = (r.task.clone(), r.method.clone());
        if !scores.contains_key(&key) {
            cells.push(key.clone());
        }
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
        let s = r.final_success().ok_or_else(|| HarnessError::Corrupt {
            path: format!("{}/{} seed {}", r.task, r.method, r.seed).into(),
            reason: "run has no evaluation".into(),
        })?;
        scores.entry(key).or_default().push(s);
    }

    let mut groups: Vec<(String, BTreeMap<String, Vec<f64>>)> = cells
        .iter()
        .map(|(t, m)| {
            let strata = BTreeMap::from([(t.clone(), scores[&(t.clone(), m.clone())].clone())]);
            (format!("{t}/{m}"), strata)
        })
        .collect();
    for m in &methods {
        let strata: BTreeMap<String, Vec<f64>> = cells
            .iter()
            .filter(|(_, cm)| cm == m)
            .map(|(t, cm)| (t.clone(), scores[&(t.clone(), cm.clone())].clone()))
            .collect();
        groups.push((format!("{POOLED}/{m}"), strata));
    }

    let mut rows = Vec::new();
    for (index, (cell, strata)) in groups.iter().enumerate() {
        let pooled: Vec<f64> = strata.values().flatten().copied().collect();
        for (k, &metric) in metrics.iter().enumerate() {
            let point = metric.apply(&pooled)?;
            let mut rng = sub_stream(opts.seed, Stream::Bootstrap, (index * Metric::ALL.len() + k) as u64);
            let (lo, hi) = stratified_bootstrap_ci(strata, metric, opts.n_bootstrap, opts.confidence, &mut rng)?;
            // Percentile intervals of the median or IQM can miss the point
            // estimate on tiny samples; widen to keep lo <= point <= hi.
            rows.push(ReportRow {
                cell: cell.clone(),
                metric,
                point,
                ci_low: lo.min(point),
                ci_high: hi.max(point),
            });
        }
    }
    Ok(AggregateReport {
        rows,
        n_bootstrap: opts.n_bootstrap,
        confidence: opts.confidence,
        seed: opts.seed,
    })
}

impl AggregateReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_HEADER.split(',')).expect("writing to memory");
        for r in &self.rows {
            w.write_record([
                r.cell.clone(),
                r.metric.to_string(),
                r.point.to_string(),
                r.ci_low.to_string(),
                r.ci_high.to_string(),
            ])
            .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }

    /// One table row per cell, one column per metric.
    pub fn to_markdown(&self) -> String {
        let mut metrics: Vec<Metric> = Vec::new();
        let mut cells: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !metrics.contains(&r.metric) {
                metrics.push(r.metric);
            }
            if !cells.contains(&r.cell.as_str()) {
                cells.push(&r.cell);
            }
        }
        let pct = (self.confidence * 100.0).round();
        let mut out = String::from("# Final evaluation success\n\n");
        let _ = writeln!(
            out,
            "Point estimates with {pct}% stratified bootstrap intervals ({} resamples, seed {}).",
            self.n_bootstrap, self.seed
        );
        out.push_str(
            "Scores are per-run success rates in [0, 1], pooled across tasks without further normalization.\n\n",
        );
        let _ = write!(out, "| cell |");
        for m in &metrics {
            let _ = write!(out, " {m} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(metrics.len()));
        out.push('\n');
        for cell in cells {
            let _ = write!(out, "| {cell} |");
            for m in &metrics {
                let r = self.rows.iter().find(|r| r.cell == cell && r.metric == *m).expect("full table");
                let _ = write!(out, " {:.3} [{:.3}, {:.3}] |", r.point, r.ci_low, r.ci_high);
            }
            out.push('\n');
        }
        out
    }

    pub fn row(&self, cell: &str, metric: Metric) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.cell == cell && r.metric == metric)
    }
}

/// Long-format learning curves, one line per evaluation.
pub fn curves_csv(runs: &[RunSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CURVES_HEADER.split(',')).expect("writing to memory");
    for r in runs {
        for e in &r.evals {
            w.write_record([
                r.task.clone(),
                r.method.clone(),
                r.seed.to_string(),
                e.step.to_string(),
                e.success.to_string(),
            ])
            .expect("writing to memory");
        }
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// Writes `report.csv`, `summary.md` and `curves.csv` into `dir`.
pub fn emit_report(
    dir: &Path,
    runs: &[RunSummary],
    metrics: &[Metric],
    opts: AggregateOptions,
) -> Result<AggregateReport, HarnessError> {
    let report = aggregate(runs, metrics, opts)?;
    write_atomic(&dir.join(REPORT_FILE), &report.to_csv())?;
    write_atomic(&dir.join(SUMMARY_FILE), &report.to_markdown())?;
    write_atomic(&dir.join(CURVES_FILE), &curves_csv(runs))?;
    Ok(report)
}
