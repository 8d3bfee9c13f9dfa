//! Numerical kernels behind the learned bonuses.
//!
//! Everything is plain `f64` arithmetic on row-major `Vec`s: a two-layer tanh
//! network for random network distillation, a linear embedding trained by an
//! inverse-dynamics classifier, the Sherman–Morrison maintained inverse
//! covariance for the elliptical bonus, and a few distribution utilities.
//! Inputs are usually sparse binary observations, so every kernel has a fast
//! path that touches only the active rows.

mod elliptical;
mod embedding;
mod net;
mod stats;

use thiserror::Error;

use crate::env::ObservationVector;

pub use elliptical::{cholesky_inverse, EllipticalState};
pub use embedding::EmbeddingModel;
pub use net::{NetGrad, TinyNet, HIDDEN};
pub use stats::{kl_categorical, softmax, KlDivergence, RunningStd, KL_FLOOR};

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("input dimension {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("network is frozen")]
    Frozen,
    #[error("action {action} out of range for {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },
}

/// Network input: a dense real vector or a sparse binary observation.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Dense(&'a [f64]),
    Binary(&'a ObservationVector),
}

impl Input<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Input::Dense(x) => x.len(),
            Input::Binary(o) => o.dim(),
        }
    }

    /// Visit `(index, value)` for every potentially nonzero entry.
    #[inline]
    fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Input::Dense(x) => {
                for (i, &v) in x.iter().enumerate() {
                    if v != 0.0 {
                        f(i, v);
                    }
                }
            }
            Input::Binary(o) => {
                for &i in o.active() {
                    f(i as usize, 1.0);
                }
            }
        }
    }

    fn check(&self, expected: usize) -> Result<(), EmbedError> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(EmbedError::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }
}

impl<'a> From<&'a [f64]> for Input<'a> {
    fn from(x: &'a [f64]) -> Self {
        Input::Dense(x)
    }
}

impl<'a> From<&'a Vec<f64>> for Input<'a> {
    fn from(x: &'a Vec<f64>) -> Self {
        Input::Dense(x)
    }
}

impl<'a> From<&'a ObservationVector> for Input<'a> {
    fn from(o: &'a ObservationVector) -> Self {
        Input::Binary(o)
    }
}

/// Squared Euclidean distance.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
