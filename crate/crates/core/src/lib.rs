//! Global and episodic novelty bonuses in contextual MDPs.
//!
//! - [`env`]: procedurally generated grid worlds and the Corridors chain
//! - [`embed`]: learned and random state embeddings, the elliptical bonus state
//! - [`bonus`]: count, prediction-error and elliptical bonuses and their combinations
//! - [`learner`]: the linear actor-critic trainer and its logs
//! - [`analysis`]: exact values, feature projections and cross-context similarity
//! - [`harness`]: seeded experiment grids, persistence and aggregate reports

pub mod analysis;
pub mod bonus;
pub mod embed;
pub mod env;
pub mod harness;
pub mod learner;
pub mod rng;

pub use analysis::{AnalysisError, Domain, Pairing, ValueMap};
pub use bonus::{BonusError, BonusSpec, Combiner, EpisodicKind, GlobalKind, Preset};
pub use embed::EmbedError;
pub use env::{ContextCount, ContextInstance, EnvError, EnvKind, FeatureKey, FeatureKind, PoolSpec, State};
pub use harness::{ExperimentConfig, HarnessError, Metric};
pub use learner::{LearnerError, RunRecord, TrainConfig};
