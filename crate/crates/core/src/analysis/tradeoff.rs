use serde::{Deserialize, Serialize};

use super::T_TARGET_999;
use crate::error::Result;
use crate::exec::{derive_seed, RunPlan};
use crate::wars::{Estimate, TSearch, TVisibility, TrialBatch, WarsModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub r: u32,
    pub w: u32,
    /// 99.9th percentile read latency.
    pub l_r_999: f64,
    /// 99.9th percentile write latency.
    pub l_w_999: f64,
    /// t-visibility at 99.9% consistency.
    pub t_999: TVisibility,
    /// Staleness of a read issued at commit.
    pub staleness_at_commit: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffTable {
    pub n: u32,
    pub seed: u64,
    pub trials: u64,
    pub rows: Vec<TradeoffRow>,
}

/// Every `(r, w)` with `1 ≤ r, w ≤ n`, ordered by `r + w`, then `r`.
pub fn all_pairs(n: u32) -> Vec<(u32, u32)> {
    let mut pairs: Vec<(u32, u32)> = (1..=n).flat_map(|r| (1..=n).map(move |w| (r, w))).collect();
    pairs.sort_by_key(|&(r, w)| (r + w, r));
    pairs
}

/// Latency and t-visibility for each `(r, w)` at the model's `n`.
pub fn tradeoff_table(
    model: &WarsModel,
    pairs: &[(u32, u32)],
    plan: &RunPlan,
    search: &TSearch,
) -> Result<TradeoffTable> {
    let base = model.spec();
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(i, &(r, w))| {
            let row_model = model.with_spec(base.with_rw(r, w)?);
            let batch = TrialBatch::simulate(&row_model, &plan.with_seed(derive_seed(plan.seed, i as u64)))?;
            Ok(TradeoffRow {
                r,
                w,
                l_r_999: batch.read_percentile(99.9)?,
                l_w_999: batch.write_percentile(99.9)?,
                t_999: batch.t_for_target(T_TARGET_999, search)?,
                staleness_at_commit: batch.staleness_at(0.0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffTable {
        n: base.n(),
        seed: plan.seed,
        trials: plan.trials,
        rows,
    })
}
