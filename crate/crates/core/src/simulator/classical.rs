use rand::Rng;

use crate::error::Result;
use crate::keyspace::{dot_mod2, BitString, KeySet};
use crate::rng::{self, SimRng};

/// Black-box probabilistic oracle: each query answers `s_i · x mod 2` for
/// an index `i` drawn uniformly and independently per query.
#[derive(Debug, Clone)]
pub struct ClassicalOracle {
    keys: KeySet,
    rng: SimRng,
    queries: u64,
}

impl ClassicalOracle {
    pub fn new(keys: KeySet, seed: u64) -> Self {
        Self::with_rng(keys, rng::seeded(seed))
    }

    pub fn with_rng(keys: KeySet, rng: SimRng) -> Self {
        Self {
            keys,
            rng,
            queries: 0,
        }
    }

    pub fn query(&mut self, x: &BitString) -> Result<bool> {
        let i = self.rng.random_range(0..self.keys.len());
        let bit = dot_mod2(x, &self.keys.keys()[i])?;
        self.queries += 1;
        Ok(bit)
    }

    /// Queries charged so far.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn k(&self) -> usize {
        self.keys.len()
    }

    pub fn width(&self) -> usize {
        self.keys.width()
    }
}
