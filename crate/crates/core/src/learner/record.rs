use serde::{Deserialize, Serialize};

use super::LearnerError;

/// One finished (or budget-truncated) training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeLine {
    /// Environment steps taken so far in the run.
    pub step: u64,
    /// 1-based episode index; 0 only for the empty-run line.
    pub episode: u64,
    pub ext_return: f64,
    pub ep_bonus_mean: f64,
    pub gl_bonus_mean: f64,
    pub invdyn_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_success: Option<f64>,
}

/// Per-step bonus decomposition, written only when tracing is on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceLine {
    pub step: u64,
    pub episodic_value: f64,
    pub global_value: f64,
    pub combined: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogLine {
    Episode(EpisodeLine),
    Trace(TraceLine),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub step: u64,
    pub success: f64,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub digest: String,
    pub seed: u64,
    pub lines: Vec<LogLine>,
}

impl RunRecord {
    pub fn episodes(&self) -> impl Iterator<Item = &EpisodeLine> {
        self.lines.iter().filter_map(|l| match l {
            LogLine::Episode(e) => Some(e),
            LogLine::Trace(_) => None,
        })
    }

    pub fn traces(&self) -> impl Iterator<Item = &TraceLine> {
        self.lines.iter().filter_map(|l| match l {
            LogLine::Trace(t) => Some(t),
            LogLine::Episode(_) => None,
        })
    }

    pub fn evals(&self) -> Vec<EvalPoint> {
        self.episodes()
            .filter_map(|e| e.eval_success.map(|success| EvalPoint { step: e.step, success }))
            .collect()
    }

    /// Success rate of the evaluation carried by the last episode line.
    pub fn final_success(&self) -> Option<f64> {
        self.episodes().last().and_then(|e| e.eval_success)
    }

    /// `<digest>_<seed>.jsonl`.
    pub fn file_name(&self) -> String {
        log_file_name(&self.digest, self.seed)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(&serde_json::to_string(line).expect("log lines serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(digest: &str, seed: u64, text: &str) -> Result<Self, LearnerError> {
        let lines = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| LearnerError::BadLog(format!("line {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<LogLine>, _>>()?;
        Ok(RunRecord {
            digest: digest.to_string(),
            seed,
            lines,
        })
    }
}

pub fn log_file_name(digest: &str, seed: u64) -> String {
    format!("{digest}_{seed}.jsonl")
}

/// Split `<digest>_<seed>.jsonl` back into its parts.
pub fn parse_log_file_name(name: &str) -> Option<(String, u64)> {
    let stem = name.strip_suffix(".jsonl")?;
    if stem.ends_with(".partial") {
        return None;
    }
    let (digest, seed) = stem.rsplit_once('_')?;
    Some((digest.to_string(), seed.parse().ok()?))
}
