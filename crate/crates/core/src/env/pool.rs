use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{generate_context, ContextInstance, EnvError, EnvKind};

/// Size of the context set: a finite count or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextCount {
    Finite(u64),
    Infinite,
}

impl fmt::Display for ContextCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextCount::Finite(n) => write!(f, "{n}"),
            ContextCount::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for ContextCount {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(ContextCount::Infinite),
            n => match n.parse::<u64>() {
                Ok(0) | Err(_) => Err(EnvError::InvalidKind(format!(
                    "context count must be a positive integer or `inf`, got `{n}`"
                ))),
                Ok(n) => Ok(ContextCount::Finite(n)),
            },
        }
    }
}

// JSON form: a positive integer or the string "inf".
impl Serialize for ContextCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ContextCount::Finite(n) => s.serialize_u64(*n),
            ContextCount::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ContextCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            N(u64),
            S(String),
        }
        let text = match Repr::deserialize(d)? {
            Repr::N(n) => n.to_string(),
            Repr::S(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Distribution over contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSpec {
    pub kind: EnvKind,
    pub contexts: ContextCount,
    #[serde(default)]
    pub base_seed: u64,
}

impl PoolSpec {
    pub fn new(kind: EnvKind, contexts: ContextCount, base_seed: u64) -> Self {
        PoolSpec {
            kind,
            contexts,
            base_seed,
        }
    }

    /// Seed of the next context: uniform over the finite set, or a fresh draw.
    pub fn draw_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.contexts {
            ContextCount::Finite(n) => self.base_seed.wrapping_add(rng.random_range(0..n)),
            ContextCount::Infinite => rng.random(),
        }
    }
}

pub fn sample_context<R: Rng + ?Sized>(
    spec: &PoolSpec,
    rng: &mut R,
) -> Result<ContextInstance, EnvError> {
    generate_context(&spec.kind, spec.draw_seed(rng))
}

/// Sampler that caches generated contexts of a finite pool.
#[derive(Debug, Clone)]
pub struct ContextPool {
    spec: PoolSpec,
    cache: HashMap<u64, Arc<ContextInstance>>,
}

impl ContextPool {
    pub fn new(spec: PoolSpec) -> Self {
        ContextPool {
            spec,
            cache: HashMap::new(),
        }
    }

    pub fn spec(&self) -> &PoolSpec {
        &self.spec
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Arc<ContextInstance>, EnvError> {
        let seed = self.spec.draw_seed(rng);
        self.get(seed)
    }

    /// Context for an explicit seed; cached only for finite pools.
    pub fn get(&mut self, seed: u64) -> Result<Arc<ContextInstance>, EnvError> {
        if let Some(c) = self.cache.get(&seed) {
            return Ok(Arc::clone(c));
        }
        let ctx = Arc::new(generate_context(&self.spec.kind, seed)?);
        if matches!(self.spec.contexts, ContextCount::Finite(_)) {
            self.cache.insert(seed, Arc::clone(&ctx));
        }
        Ok(ctx)
    }
}
