use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bonus::BonusSpec;
use crate::env::{FeatureKind, PoolSpec};
use crate::learner::TrainConfig;

/// One (task, method) combination, run for every seed of the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    /// Stratum for pooled statistics.
    pub task: String,
    /// Methods with the same name are pooled across tasks.
    pub method: String,
    /// The trainer setup; its `seed` is replaced per run.
    pub train: TrainConfig,
}

impl CellConfig {
    pub fn digest(&self) -> String {
        self.train.digest()
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.task, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cells: Vec<CellConfig>,
    #[serde(default = "defaults::n_seeds")]
    pub n_seeds: u64,
    /// Run `i` of every cell uses seed `base_seed + i`.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "defaults::n_bootstrap")]
    pub n_bootstrap: usize,
    /// Seed of the bootstrap resampling.
    #[serde(default)]
    pub analysis_seed: u64,
}

mod defaults {
    use std::path::PathBuf;

    pub fn n_seeds() -> u64 {
        5
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("runs")
    }
    pub fn n_bootstrap() -> usize {
        2000
    }
}

/// A task of a grid: where contexts come from and which feature counts.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTask {
    pub name: String,
    pub pool: PoolSpec,
    pub psi: FeatureKind,
}

/// A method of a grid; `None` trains without a bonus.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMethod {
    pub name: String,
    pub bonus: Option<BonusSpec>,
}

impl ExperimentConfig {
    pub fn new(cells: Vec<CellConfig>, n_seeds: u64) -> Self {
        ExperimentConfig {
            cells,
            n_seeds,
            base_seed: 0,
            out_dir: defaults::out_dir(),
            n_bootstrap: defaults::n_bootstrap(),
            analysis_seed: 0,
        }
    }

    /// Every task crossed with every method, sharing the trainer settings of
    /// `template` (whose pool and bonus are replaced).
    pub fn grid(tasks: &[GridTask], methods: &[GridMethod], template: &TrainConfig, n_seeds: u64) -> Self {
        let cells = tasks
            .iter()
            .flat_map(|t| {
                methods.iter().map(move |m| CellConfig {
                    task: t.name.clone(),
                    method: m.name.clone(),
                    train: TrainConfig {
                        pool: t.pool,
                        bonus: m.bonus.map(|b| b.with_psi(t.psi)),
                        ..template.clone()
                    },
                })
            })
            .collect();
        ExperimentConfig::new(cells, n_seeds)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.cells.is_empty() {
            return bad("no cells".into());
        }
        if self.n_seeds == 0 {
            return bad("n_seeds must be at least 1".into());
        }
        if self.n_bootstrap == 0 {
            return bad("n_bootstrap must be at least 1".into());
        }
        if self.base_seed.checked_add(self.n_seeds).is_none() {
            return bad("base_seed + n_seeds overflows".into());
        }
        let mut digests = BTreeSet::new();
        let mut labels = BTreeSet::new();
        for cell in &self.cells {
            cell.train
                .validate()
                .map_err(|e| HarnessError::Config(format!("cell {}: {e}", cell.label())))?;
            if !labels.insert(cell.label()) {
                return bad(format!("duplicate cell {}", cell.label()));
            }
            if !digests.insert(cell.digest()) {
                return bad(format!("cell {} repeats another cell's trainer setup", cell.label()));
            }
        }
        Ok(())
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n_seeds).map(|i| self.base_seed + i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bonus::Preset;
    use crate::env::{ContextCount, EnvKind};

    fn template() -> TrainConfig {
        let pool = PoolSpec::new(EnvKind::corridors(3, 4).unwrap(), ContextCount::Finite(1), 0);
        TrainConfig::new(pool, None, 100)
    }

    fn small_grid() -> ExperimentConfig {
        let tasks = [
            GridTask {
                name: "c".into(),
                pool: template().pool,
                psi: FeatureKind::Position,
            },
            GridTask {
                name: "k".into(),
                pool: PoolSpec::new(EnvKind::key_room(5).unwrap(), ContextCount::Infinite, 0),
                psi: FeatureKind::Message,
            },
        ];
        let methods = [
            GridMethod {
                name: "none".into(),
                bonus: None,
            },
            GridMethod {
                name: "global".into(),
                bonus: Some(BonusSpec::preset(Preset::Global)),
            },
        ];
        ExperimentConfig::grid(&tasks, &methods, &template(), 2)
    }

    #[test]
    fn grid_expands_and_round_trips() {
        let cfg = small_grid();
        assert_eq!(cfg.cells.len(), 4);
        assert_eq!(cfg.cells[3].train.bonus.unwrap().psi, FeatureKind::Message);
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(cfg.seeds().collect::<Vec<_>>(), [0, 1]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let cfg = small_grid();
        let mut v: serde_json::Value = serde_json::from_str(&cfg.to_json()).unwrap();
        v["colour"] = "red".into();
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&cfg.to_json()).unwrap();
        v["cells"][0]["train"]["lr_actr"] = 0.1.into();
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());

        let mut dup = cfg.clone();
        dup.cells[1].train = dup.cells[0].train.clone();
        assert!(dup.validate().unwrap_err().to_string().contains("c/global"));

        let mut zero = cfg;
        zero.n_seeds = 0;
        assert!(zero.validate().is_err());
    }
}
