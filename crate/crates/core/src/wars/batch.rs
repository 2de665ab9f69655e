use serde::{Deserialize, Serialize};

use super::estimate::Estimate;
use super::trial::TrialEngine;
use super::{check_time, check_trials, WarsModel};
use crate::error::{Error, Result};
use crate::exec::RunPlan;

/// Percentiles reported in every [`PercentileTable`], besides min and max.
pub const STANDARD_PERCENTILES: [f64; 5] = [50.0, 75.0, 95.0, 99.0, 99.9];

/// A percentile `p < 100` needs at least this many expected samples above it.
pub const MIN_TAIL_SAMPLES: u64 = 10;

/// Result of a t-visibility search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TVisibility {
    Reached { t_ms: f64 },
    /// The target was not met anywhere on the search grid.
    NotReached { horizon_ms: f64 },
}

impl TVisibility {
    pub fn t_ms(&self) -> Option<f64> {
        match *self {
            TVisibility::Reached { t_ms } => Some(t_ms),
            TVisibility::NotReached { .. } => None,
        }
    }
}

/// Time grid for t-visibility searches: `0`, then a geometric run from
/// `geometric_start_ms` up to `linear_from_ms`, then evenly spaced points up
/// to `horizon_ms`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TSearch {
    pub horizon_ms: f64,
    pub geometric_start_ms: f64,
    pub geometric_ratio: f64,
    pub linear_from_ms: f64,
    pub linear_step_ms: f64,
}

impl Default for TSearch {
    fn default() -> Self {
        TSearch {
            horizon_ms: 10_000.0,
            geometric_start_ms: 0.01,
            geometric_ratio: 1.01,
            linear_from_ms: 50.0,
            linear_step_ms: 0.5,
        }
    }
}

impl TSearch {
    pub fn with_horizon(mut self, horizon_ms: f64) -> Self {
        self.horizon_ms = horizon_ms;
        self
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let ok = self.horizon_ms.is_finite()
            && self.horizon_ms > 0.0
            && self.geometric_start_ms > 0.0
            && self.geometric_ratio > 1.0
            && self.linear_step_ms > 0.0
            && self.linear_from_ms >= self.geometric_start_ms;
        if !ok {
            return Err(Error::config(format!("invalid t search grid {self:?}")));
        }
        let linear_from = self.linear_from_ms.min(self.horizon_ms);
        let mut grid = vec![0.0];
        let mut t = self.geometric_start_ms;
        while t < linear_from {
            grid.push(t);
            t *= self.geometric_ratio;
        }
        let steps = ((self.horizon_ms - linear_from) / self.linear_step_ms).ceil() as u64;
        for i in 0..=steps {
            grid.push((linear_from + i as f64 * self.linear_step_ms).min(self.horizon_ms));
        }
        grid.dedup();
        Ok(grid)
    }
}

/// Pool-adjacent-violators fit of a non-decreasing sequence (equal weights).
pub fn isotonic_non_decreasing(values: &[f64]) -> Vec<f64> {
    // (block mean, block length)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().unwrap() = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, n)| std::iter::repeat_n(m, n))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercentilePoint {
    pub percentile: f64,
    pub ms: f64,
}

/// Nearest-rank percentiles of one operation's latency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercentileTable {
    pub min_ms: f64,
    pub p50_ms: f64,
    pub p75_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
    pub p999_ms: f64,
    pub max_ms: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requested: Vec<PercentilePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyTable {
    pub trials: u64,
    pub seed: u64,
    pub read: PercentileTable,
    pub write: PercentileTable,
}

fn check_percentile(p: f64, trials: u64) -> Result<()> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::range(format!("percentile {p} is not in [0, 100]")));
    }
    let tail = (100.0 - p) / 100.0 * trials as f64;
    if p > 0.0 && p < 100.0 && tail < MIN_TAIL_SAMPLES as f64 - 1e-9 {
        return Err(Error::InsufficientTrials {
            trials,
            percentile: p,
            min_tail: MIN_TAIL_SAMPLES,
        });
    }
    Ok(())
}

/// Nearest-rank percentile of an ascending, non-empty sample.
pub(crate) fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = (p / 100.0 * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

/// Every trial of one run, kept for answering many questions at once.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialBatch {
    seed: u64,
    /// Ascending staleness horizons; trial is stale at `t` iff `t < h`.
    horizons: Vec<f64>,
    read_ms: Vec<f64>,
    write_ms: Vec<f64>,
}

impl TrialBatch {
    pub fn simulate(model: &WarsModel, plan: &RunPlan) -> Result<Self> {
        check_trials(plan)?;
        let shards = plan.map_shards(|rng, trials| {
            let mut engine = TrialEngine::new(model);
            let mut out = Vec::with_capacity(trials as usize);
            for _ in 0..trials {
                let d = engine.draw(rng);
                out.push((d.horizon, d.read_ms, d.write_ms));
            }
            out
        });
        let total = plan.trials as usize;
        let mut horizons = Vec::with_capacity(total);
        let mut read_ms = Vec::with_capacity(total);
        let mut write_ms = Vec::with_capacity(total);
        for (h, r, w) in shards.into_iter().flatten() {
            horizons.push(h);
            read_ms.push(r);
            write_ms.push(w);
        }
        horizons.sort_unstable_by(f64::total_cmp);
        read_ms.sort_unstable_by(f64::total_cmp);
        write_ms.sort_unstable_by(f64::total_cmp);
        Ok(TrialBatch {
            seed: plan.seed,
            horizons,
            read_ms,
            write_ms,
        })
    }

    pub fn trials(&self) -> u64 {
        self.horizons.len() as u64
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn consistent_count(&self, t_ms: f64) -> u64 {
        self.horizons.partition_point(|&h| h <= t_ms) as u64
    }

    pub fn staleness_at(&self, t_ms: f64) -> Result<Estimate> {
        check_time(t_ms)?;
        Ok(Estimate::from_counts(self.trials() - self.consistent_count(t_ms), self.trials()))
    }

    pub fn consistency_at(&self, t_ms: f64) -> Result<Estimate> {
        check_time(t_ms)?;
        Ok(Estimate::from_counts(self.consistent_count(t_ms), self.trials()))
    }

    /// Nearest-rank read latency percentile.
    pub fn read_percentile(&self, p: f64) -> Result<f64> {
        check_percentile(p, self.trials())?;
        Ok(nearest_rank(&self.read_ms, p))
    }

    /// Nearest-rank write latency percentile.
    pub fn write_percentile(&self, p: f64) -> Result<f64> {
        check_percentile(p, self.trials())?;
        Ok(nearest_rank(&self.write_ms, p))
    }

    pub fn latency(&self, extra_percentiles: &[f64]) -> Result<LatencyTable> {
        for &p in STANDARD_PERCENTILES.iter().chain(extra_percentiles) {
            check_percentile(p, self.trials())?;
        }
        let table = |sorted: &[f64]| PercentileTable {
            min_ms: sorted[0],
            p50_ms: nearest_rank(sorted, 50.0),
            p75_ms: nearest_rank(sorted, 75.0),
            p95_ms: nearest_rank(sorted, 95.0),
            p99_ms: nearest_rank(sorted, 99.0),
            p999_ms: nearest_rank(sorted, 99.9),
            max_ms: sorted[sorted.len() - 1],
            requested: extra_percentiles
                .iter()
                .map(|&p| PercentilePoint {
                    percentile: p,
                    ms: nearest_rank(sorted, p),
                })
                .collect(),
        };
        Ok(LatencyTable {
            trials: self.trials(),
            seed: self.seed,
            read: table(&self.read_ms),
            write: table(&self.write_ms),
        })
    }

    /// Smallest `t` with consistency ≥ `target`: the consistency curve on the
    /// search grid is made monotone by isotonic regression and the crossing is
    /// linearly interpolated between the two grid points around it.
    pub fn t_for_target(&self, target: f64, search: &TSearch) -> Result<TVisibility> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::domain(format!("target consistency {target} must be in (0, 1)")));
        }
        let grid = search.grid()?;
        let total = self.trials() as f64;
        let raw: Vec<f64> = grid
            .iter()
            .map(|&t| self.consistent_count(t) as f64 / total)
            .collect();
        let smooth = isotonic_non_decreasing(&raw);
        match smooth.iter().position(|&c| c >= target) {
            None => Ok(TVisibility::NotReached {
                horizon_ms: search.horizon_ms,
            }),
            Some(0) => Ok(TVisibility::Reached { t_ms: 0.0 }),
            Some(j) => {
                let (t0, t1) = (grid[j - 1], grid[j]);
                let (c0, c1) = (smooth[j - 1], smooth[j]);
                let t_ms = t0 + (target - c0) / (c1 - c0) * (t1 - t0);
                Ok(TVisibility::Reached { t_ms })
            }
        }
    }
}
