//! Novelty bonuses.
//!
//! A bonus is an episodic factor (reset at every episode start) and a global
//! factor (accumulated over the whole run) joined by a [`Combiner`]. Count
//! bonuses read [`FeatureKey`](crate::env::FeatureKey) visit tables; learned
//! bonuses read observations. Every transition's bonus is attributed to the
//! state it arrives in, and visits are recorded before the bonus is queried.

mod counts;
mod engine;
pub mod formulas;
mod spec;

use thiserror::Error;

use crate::embed::EmbedError;

pub use counts::{CountTable, Scope};
pub use engine::{BonusEngine, BonusOutput, StepInput};
pub use formulas::{combine, shaped_reward};
pub use spec::{BonusSpec, Combiner, EmbeddingSource, EpisodicKind, GlobalKind, Preset};

#[derive(Debug, Error)]
pub enum BonusError {
    #[error("invalid bonus spec: {0}")]
    InvalidSpec(String),
    #[error("bonus state has no {0}")]
    Missing(&'static str),
    #[error("non-finite bonus (episodic {episodic}, global {global})")]
    NonFinite { episodic: f64, global: f64 },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}
