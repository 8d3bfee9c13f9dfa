use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{optimal_values, project_value, AnalysisError, ValueMap};
use crate::env::{generate_context, ContextCount, FeatureKey, FeatureKind, PoolSpec};

/// Which features a similarity is computed over.
///
/// `Full` is the common feature space with unreachable features at 0; since
/// zeros add nothing to a dot product or a norm, this is the union of the two
/// maps' supports. `Reachable` keeps only features reachable in both contexts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Full,
    Reachable,
}

/// How context pairs are drawn.
///
/// `WithReplacement` draws both contexts independently from the pool, so a
/// pool of `n` contexts pairs a context with itself `1/n` of the time.
/// `Distinct` redraws the second context until it differs (when it can).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    #[default]
    WithReplacement,
    Distinct,
}

macro_rules! text_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }

        impl FromStr for $t {
            type Err = AnalysisError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $($s => Ok($v),)+
                    other => Err(AnalysisError::Invalid(format!("unknown {} `{other}`", stringify!($t).to_lowercase()))),
                }
            }
        }
    };
}

text_enum!(Domain, Domain::Full => "full", Domain::Reachable => "reachable");
text_enum!(Pairing, Pairing::WithReplacement => "with_replacement", Pairing::Distinct => "distinct");

/// Cosine similarity of two value maps of the same environment and feature.
/// An all-zero map is an error; on the reachable domain, two maps whose
/// shared features are all zero score 0.
pub fn cosine_similarity(a: &ValueMap, b: &ValueMap, domain: Domain) -> Result<f64, AnalysisError> {
    if a.kind != b.kind || a.psi != b.psi {
        return Err(AnalysisError::Mismatch(format!(
            "({}, {}) vs ({}, {})",
            a.kind, a.psi, b.kind, b.psi
        )));
    }
    let keys: BTreeSet<&FeatureKey> = match domain {
        Domain::Full => a.entries.keys().chain(b.entries.keys()).collect(),
        Domain::Reachable => a.entries.keys().filter(|z| b.entries.contains_key(z)).collect(),
    };
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for z in keys {
        let (x, y) = (a.value(z), b.value(z));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    for m in [a, b] {
        if m.entries.values().all(|&v| v == 0.0) {
            return Err(AnalysisError::ZeroNorm(m.context_id));
        }
    }
    // Nonzero maps with nothing nonzero in common share no direction.
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    // One square root keeps self-similarity exactly 1.
    Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityOptions {
    pub n_pairs: usize,
    pub gamma: f64,
    pub domain: Domain,
    pub pairing: Pairing,
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        SimilarityOptions {
            n_pairs: 50,
            gamma: 0.9,
            domain: Domain::Full,
            pairing: Pairing::WithReplacement,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_pairs: usize,
}

/// Mean cosine similarity between value maps of context pairs. A context
/// paired with itself scores exactly 1.
///
/// Pairs are drawn at random, except that a finite pool with at most
/// `n_pairs` distinct pairs is enumerated and the exact expectation returned
/// (with zero stderr): under [`Pairing::WithReplacement`] that is
/// `1/n + (1 - 1/n)` times the mean over distinct pairs.
pub fn avg_cosine_similarity<R: Rng + ?Sized>(
    spec: &PoolSpec,
    psi: FeatureKind,
    opts: &SimilarityOptions,
    rng: &mut R,
) -> Result<SimilarityEstimate, AnalysisError> {
    if opts.n_pairs == 0 {
        return Err(AnalysisError::Invalid("n_pairs must be at least 1".into()));
    }
    if !(opts.gamma > 0.0 && opts.gamma < 1.0) {
        return Err(AnalysisError::Invalid(format!("gamma must lie in (0, 1), got {}", opts.gamma)));
    }
    if let ContextCount::Finite(n) = spec.contexts {
        if n >= 2 && n.saturating_mul(n - 1) / 2 <= opts.n_pairs as u64 {
            return exhaustive(spec, n, psi, opts);
        }
    }
    let can_differ = !matches!(spec.contexts, ContextCount::Finite(1));
    let pairs: Vec<(u64, u64)> = (0..opts.n_pairs)
        .map(|_| {
            let c = spec.draw_seed(rng);
            let mut d = spec.draw_seed(rng);
            while opts.pairing == Pairing::Distinct && can_differ && d == c {
                d = spec.draw_seed(rng);
            }
            (c, d)
        })
        .collect();

    let seeds: BTreeSet<u64> = pairs.iter().filter(|(c, d)| c != d).flat_map(|&(c, d)| [c, d]).collect();
    let maps: HashMap<u64, ValueMap> = seeds
        .into_par_iter()
        .map(|seed| {
            let ctx = generate_context(&spec.kind, seed)?;
            Ok((seed, project_value(&optimal_values(&ctx, opts.gamma), psi, &ctx)))
        })
        .collect::<Result<_, AnalysisError>>()?;

    let sims = pairs
        .iter()
        .map(|(c, d)| {
            if c == d {
                Ok(1.0)
            } else {
                cosine_similarity(&maps[c], &maps[d], opts.domain)
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let n = sims.len() as f64;
    let mean = sims.iter().sum::<f64>() / n;
    let stderr = if sims.len() < 2 {
        0.0
    } else {
        let var = sims.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    Ok(SimilarityEstimate {
        mean,
        stderr,
        n_pairs: sims.len(),
    })
}

fn exhaustive(spec: &PoolSpec, n: u64, psi: FeatureKind, opts: &SimilarityOptions) -> Result<SimilarityEstimate, AnalysisError> {
    let maps = (0..n)
        .into_par_iter()
        .map(|i| {
            let ctx = generate_context(&spec.kind, spec.base_seed.wrapping_add(i))?;
            Ok(project_value(&optimal_values(&ctx, opts.gamma), psi, &ctx))
        })
        .collect::<Result<Vec<ValueMap>, AnalysisError>>()?;
    let mut total = 0.0;
    let mut count = 0;
    for (i, a) in maps.iter().enumerate() {
        for b in &maps[i + 1..] {
            total += cosine_similarity(a, b, opts.domain)?;
            count += 1;
        }
    }
    let distinct = total / count as f64;
    let mean = match opts.pairing {
        Pairing::Distinct => distinct,
        Pairing::WithReplacement => {
            let same = 1.0 / n as f64;
            same + (1.0 - same) * distinct
        }
    };
    Ok(SimilarityEstimate {
        mean,
        stderr: 0.0,
        n_pairs: count,
    })
}
