use std::collections::HashMap;

use crate::env::FeatureKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Persists for the whole run.
    Global,
    /// Cleared at the start of every episode.
    Episodic,
}

/// Visit counts over feature keys.
#[derive(Debug, Clone)]
pub struct CountTable {
    scope: Scope,
    counts: HashMap<FeatureKey, u64>,
}

impl CountTable {
    pub fn new(scope: Scope) -> Self {
        CountTable {
            scope,
            counts: HashMap::new(),
        }
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    /// Record a visit and return the updated count.
    pub fn record(&mut self, key: FeatureKey) -> u64 {
        let n = self.counts.entry(key).or_insert(0);
        *n += 1;
        *n
    }

    pub fn get(&self, key: &FeatureKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn clear(&mut self) {
        self.counts.clear();
    }
}
