//! Point estimates and stratified bootstrap intervals over per-run scores.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mean,
    Median,
    Iqm,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mean, Metric::Median, Metric::Iqm];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mean => "mean",
            Metric::Median => "median",
            Metric::Iqm => "iqm",
        }
    }

    pub fn apply(self, scores: &[f64]) -> Result<f64, HarnessError> {
        match self {
            Metric::Mean => mean(scores),
            Metric::Median => median(scores),
            Metric::Iqm => iqm(scores),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| HarnessError::Config(format!("unknown metric `{s}` (mean, median, iqm)")))
    }
}

fn sorted(scores: &[f64]) -> Result<Vec<f64>, HarnessError> {
    if scores.is_empty() {
        return Err(HarnessError::EmptyScores);
    }
    if let Some(x) = scores.iter().find(|x| x.is_nan()) {
        return Err(HarnessError::Config(format!("score {x} is not a number")));
    }
    let mut v = scores.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn mean(scores: &[f64]) -> Result<f64, HarnessError> {
    if scores.is_empty() {
        return Err(HarnessError::EmptyScores);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

pub fn median(scores: &[f64]) -> Result<f64, HarnessError> {
    let v = sorted(scores)?;
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Mean after dropping the `floor(n/4)` lowest and highest scores.
pub fn iqm(scores: &[f64]) -> Result<f64, HarnessError> {
    let v = sorted(scores)?;
    let cut = v.len() / 4;
    mean(&v[cut..v.len() - cut])
}

/// Linear interpolation between order statistics.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile interval of `metric` over resamples that redraw each task's
/// seeds with replacement and pool all tasks' scores.
pub fn stratified_bootstrap_ci<R: Rng + ?Sized>(
    scores_by_task: &BTreeMap<String, Vec<f64>>,
    metric: Metric,
    n_resamples: usize,
    confidence: f64,
    rng: &mut R,
) -> Result<(f64, f64), HarnessError> {
    if scores_by_task.is_empty() || scores_by_task.values().any(Vec::is_empty) {
        return Err(HarnessError::EmptyScores);
    }
    if !(confidence > 0.0 && confidence < 1.0) || n_resamples == 0 {
        return Err(HarnessError::Config(format!(
            "bootstrap needs confidence in (0, 1) and resamples >= 1, got {confidence} and {n_resamples}"
        )));
    }
    let total: usize = scores_by_task.values().map(Vec::len).sum();
    let mut pooled = Vec::with_capacity(total);
    let mut stats = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        pooled.clear();
        for scores in scores_by_task.values() {
            pooled.extend((0..scores.len()).map(|_| scores[rng.random_range(0..scores.len())]));
        }
        stats.push(metric.apply(&pooled)?);
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0;
    Ok((percentile(&stats, tail), percentile(&stats, 1.0 - tail)))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn hand_computed_metrics() {
        let v: Vec<f64> = (1..=8).map(f64::from).collect();
        assert_eq!(iqm(&v).unwrap(), 4.5);
        assert_eq!(iqm(&[3.0]).unwrap(), 3.0);
        assert_eq!(iqm(&[0.2; 7]).unwrap(), 0.2);
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(matches!(iqm(&[]), Err(HarnessError::EmptyScores)));
        assert!(mean(&[]).is_err());
        assert_eq!("IQM".parse::<Metric>().unwrap(), Metric::Iqm);
    }

    #[test]
    fn bootstrap_oracles() {
        let tasks: BTreeMap<String, Vec<f64>> =
            [("A".to_string(), vec![0.0; 5]), ("B".to_string(), vec![1.0; 5])].into();
        let mut rng = stream(1, Stream::Bootstrap);
        assert_eq!(
            stratified_bootstrap_ci(&tasks, Metric::Mean, 500, 0.95, &mut rng).unwrap(),
            (0.5, 0.5)
        );
        let flat: BTreeMap<String, Vec<f64>> = [("A".to_string(), vec![0.7; 4])].into();
        for m in Metric::ALL {
            assert_eq!(
                stratified_bootstrap_ci(&flat, m, 100, 0.95, &mut rng).unwrap(),
                (0.7, 0.7)
            );
        }
        let empty: BTreeMap<String, Vec<f64>> = [("A".to_string(), vec![])].into();
        assert!(stratified_bootstrap_ci(&empty, Metric::Mean, 10, 0.95, &mut rng).is_err());
        assert!(stratified_bootstrap_ci(&flat, Metric::Mean, 10, 1.0, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn iqm_is_bounded_and_symmetric(v in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let x = iqm(&v).unwrap();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
            let sym: Vec<f64> = v.iter().flat_map(|&a| [a, -a]).collect();
            prop_assert!(iqm(&sym).unwrap().abs() < 1e-9);
        }

        #[test]
        fn bootstrap_is_seeded_and_inside_the_range(
            a in proptest::collection::vec(0.0f64..1.0, 1..8),
            b in proptest::collection::vec(0.0f64..1.0, 1..8),
            seed in any::<u64>(),
        ) {
            let tasks: BTreeMap<String, Vec<f64>> = [("a".to_string(), a.clone()), ("b".to_string(), b.clone())].into();
            for m in Metric::ALL {
                let x = stratified_bootstrap_ci(&tasks, m, 200, 0.95, &mut stream(seed, Stream::Bootstrap)).unwrap();
                let y = stratified_bootstrap_ci(&tasks, m, 200, 0.95, &mut stream(seed, Stream::Bootstrap)).unwrap();
                prop_assert_eq!(x, y);
                let all: Vec<f64> = a.iter().chain(&b).copied().collect();
                let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo <= x.0 && x.0 <= x.1 && x.1 <= hi);
            }
        }
    }
}
