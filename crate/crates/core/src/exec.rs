//! Deterministic shard plan for Monte Carlo runs.
//!
//! A run of `trials` is cut into fixed-size shards; shard `i` draws from
//! stream `i` of the run seed. Shard results are merged in shard order, so
//! the outcome depends only on `(seed, trials, shard_size)` and never on the
//! number of worker threads or on whether the parallel path is compiled in.

use serde::{Deserialize, Serialize};

use crate::rng::RandomSource;

pub const DEFAULT_SHARD_SIZE: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Rayon work-stealing over shards. Runs sequentially when the
    /// `parallel` feature is off.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunPlan {
    pub trials: u64,
    pub seed: u64,
    pub shard_size: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl RunPlan {
    pub fn new(trials: u64, seed: u64) -> Self {
        RunPlan {
            trials,
            seed,
            shard_size: DEFAULT_SHARD_SIZE,
            execution: Execution::default(),
        }
    }

    pub fn sequential(self) -> Self {
        self.with_execution(Execution::Sequential)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_shard_size(mut self, shard_size: u64) -> Self {
        self.shard_size = shard_size.max(1);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn shard_count(&self) -> u64 {
        self.trials.div_ceil(self.shard_size.max(1))
    }

    fn shard_trials(&self, shard: u64) -> u64 {
        let size = self.shard_size.max(1);
        size.min(self.trials - shard * size)
    }

    /// Runs `f(rng, trials_in_shard)` once per shard and returns the results
    /// in shard order.
    pub fn map_shards<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut RandomSource, u64) -> T + Sync,
    {
        let run = |shard: u64| {
            let mut rng = RandomSource::for_stream(self.seed, shard);
            f(&mut rng, self.shard_trials(shard))
        };
        match self.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..self.shard_count()).into_par_iter().map(run).collect()
            }
            _ => (0..self.shard_count()).map(run).collect(),
        }
    }
}

/// Seed for point `index` of a multi-point job.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
