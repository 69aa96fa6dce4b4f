//! Work limits for the exhaustive searches.

use serde::{Deserialize, Serialize};

/// Environment variable that overrides [`Budget::max_work`].
pub const BUDGET_ENV: &str = "CUTOFFLAB_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest class that may be enumerated member by member.
    pub max_hypotheses: usize,
    /// Rough cap on elementary steps of a single search.
    pub max_work: u64,
    /// Largest number of multi-vertex hyperedges an exhaustive orientation search accepts.
    pub max_multi_edges: usize,
    /// Largest number of sequences an exact expectation may enumerate.
    pub max_sequences: u64,
    /// Largest point set a single shattering check accepts.
    pub max_points: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_hypotheses: 1 << 20,
            max_work: 4_000_000_000,
            max_multi_edges: 20,
            max_sequences: 100_000,
            max_points: 12,
        }
    }
}

impl Budget {
    /// Defaults, with `max_work` taken from `CUTOFFLAB_BUDGET` when set.
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(w) = std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            b.max_work = w;
        }
        b
    }

    pub fn with_work(mut self, max_work: u64) -> Self {
        self.max_work = max_work;
        self
    }
}
