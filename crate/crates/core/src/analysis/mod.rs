//! Exact optimal values and how they vary across contexts.
//!
//! [`optimal_values`] solves a context by graph search (`V* = gamma^k`),
//! [`project_value`] pushes the values onto a feature space by taking the
//! minimum over each feature's preimage, and [`avg_cosine_similarity`]
//! measures how much those projected maps agree between contexts.
//!
//! Unreachable features carry the value 0. Failure terminals (lava deaths)
//! are absorbing and are left out of every preimage: the agent never acts
//! there, and since it does not move when it dies, keeping them would zero
//! the position value of every cell next to lava.

mod export;
mod similarity;
mod values;

use std::path::PathBuf;

use thiserror::Error;

use crate::env::EnvError;

pub use export::{export_value_map, parse_value_map, read_value_map, write_value_map};
pub use similarity::{
    avg_cosine_similarity, cosine_similarity, Domain, Pairing, SimilarityEstimate, SimilarityOptions,
};
pub use values::{full_domain, optimal_values, project_value, StateValues, ValueMap};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("value map for context {0} has zero norm over the domain")]
    ZeroNorm(u64),
    #[error("value maps disagree on {0}")]
    Mismatch(String),
    #[error("invalid analysis request: {0}")]
    Invalid(String),
    #[error("malformed value map: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
}
