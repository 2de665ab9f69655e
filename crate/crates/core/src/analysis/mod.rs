//! Sweeps over the simulator: consistency-vs-t curves, write-latency and
//! replication-factor families, (R, W) trade-off tables and SLA search.
//!
//! Every result records the seed and trial count that produced it. A t-axis
//! sweep evaluates all grid times on one batch of trials; other axes run one
//! batch per point, seeded by [`derive_seed`](crate::exec::derive_seed) of the
//! master seed and the point index.

mod sla;
mod tradeoff;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{derive_seed, RunPlan};
use crate::latency::{Distribution, WarsDistributions};
use crate::staleness::QuorumSpec;
use crate::wars::{isotonic_non_decreasing, Estimate, TSearch, TVisibility, Topology, TrialBatch, WarsModel};

pub use sla::{sla_search, Objective, SlaCandidate, SlaConstraint, SlaOutcome, SlaReport};
pub use tradeoff::{all_pairs, tradeoff_table, TradeoffRow, TradeoffTable};

/// Target used for the "t at 99.9% consistency" columns.
pub const T_TARGET_999: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t_ms: f64,
    /// Raw Monte Carlo consistency estimate at `t_ms`.
    pub consistency: Estimate,
    /// Isotonic (non-decreasing in t) fit of the raw series.
    pub smoothed: f64,
}

/// Probability of a consistent read as a function of time after commit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub seed: u64,
    pub trials: u64,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    fn from_batch(label: String, batch: &TrialBatch, t_grid: &[f64]) -> Result<Self> {
        let raw = t_grid
            .iter()
            .map(|&t| batch.consistency_at(t))
            .collect::<Result<Vec<_>>>()?;
        let smooth = isotonic_non_decreasing(&raw.iter().map(|e| e.p_hat).collect::<Vec<_>>());
        Ok(Curve {
            label,
            seed: batch.seed(),
            trials: batch.trials(),
            points: t_grid
                .iter()
                .zip(raw)
                .zip(smooth)
                .map(|((&t_ms, consistency), smoothed)| CurvePoint {
                    t_ms,
                    consistency,
                    smoothed,
                })
                .collect(),
        })
    }

    /// First grid time where the smoothed curve reaches `target`, linearly
    /// interpolated from the previous point.
    pub fn crossing(&self, target: f64) -> Option<f64> {
        let j = self.points.iter().position(|p| p.smoothed >= target)?;
        if j == 0 {
            return Some(self.points[0].t_ms);
        }
        let (a, b) = (&self.points[j - 1], &self.points[j]);
        Some(a.t_ms + (target - a.smoothed) / (b.smoothed - a.smoothed) * (b.t_ms - a.t_ms))
    }

    pub fn at(&self, t_ms: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.t_ms == t_ms)
    }
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::config("t grid is empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::config("t grid values must be finite and non-negative"));
    }
    if t_grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::config("t grid must be strictly increasing"));
    }
    Ok(())
}

/// Consistency at each grid time, all from the same trials.
pub fn sweep_t(model: &WarsModel, t_grid: &[f64], plan: &RunPlan) -> Result<Curve> {
    check_grid(t_grid)?;
    let batch = TrialBatch::simulate(model, plan)?;
    Curve::from_batch(model.spec().to_string(), &batch, t_grid)
}

/// One curve per write-request distribution, with `A = R = S = others`.
pub fn sweep_write_distribution(
    others: &Distribution,
    writes: &[Distribution],
    spec: QuorumSpec,
    t_grid: &[f64],
    plan: &RunPlan,
) -> Result<Vec<Curve>> {
    check_grid(t_grid)?;
    if writes.is_empty() {
        return Err(Error::config("no write distributions to sweep"));
    }
    writes
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let model = WarsModel::new(
                spec,
                WarsDistributions::with_write(w.clone(), others.clone()),
                Topology::Uniform,
            )?;
            let point_plan = plan.with_seed(derive_seed(plan.seed, i as u64));
            let batch = TrialBatch::simulate(&model, &point_plan)?;
            let label = serde_json::to_string(w)?;
            Curve::from_batch(label, &batch, t_grid)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationPoint {
    pub n: u32,
    pub curve: Curve,
    /// t at which consistency reaches 99.9%.
    pub t_999: TVisibility,
    /// The template uses R or W other than 1.
    pub beyond_r_w_one: bool,
}

/// Curves for each replication factor, keeping the template's R, W and
/// latency distributions.
pub fn sweep_replication(
    template: &WarsModel,
    n_values: &[u32],
    t_grid: &[f64],
    plan: &RunPlan,
    search: &TSearch,
) -> Result<Vec<ReplicationPoint>> {
    check_grid(t_grid)?;
    if n_values.is_empty() {
        return Err(Error::config("no replica counts to sweep"));
    }
    let base = template.spec();
    n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let model = template.with_spec(base.with_n(n)?);
            let point_plan = plan.with_seed(derive_seed(plan.seed, i as u64));
            let batch = TrialBatch::simulate(&model, &point_plan)?;
            Ok(ReplicationPoint {
                n,
                curve: Curve::from_batch(format!("n={n}"), &batch, t_grid)?,
                t_999: batch.t_for_target(T_TARGET_999, search)?,
                beyond_r_w_one: base.r() != 1 || base.w() != 1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u32, r: u32, w: u32) -> QuorumSpec {
        QuorumSpec::new(n, r, w).unwrap()
    }

    #[test]
    fn strict_curve_is_flat() {
        let model = WarsModel::from_preset("lnkd-ssd", spec(3, 2, 2)).unwrap();
        let curve = sweep_t(&model, &[0.0, 1.0, 5.0], &RunPlan::new(20_000, 1)).unwrap();
        assert!(curve.points.iter().all(|p| p.consistency.p_hat == 1.0 && p.smoothed == 1.0));
        assert_eq!(curve.crossing(0.999), Some(0.0));
    }

    #[test]
    fn grid_validation() {
        let model = WarsModel::from_preset("lnkd-ssd", spec(3, 1, 1)).unwrap();
        let plan = RunPlan::new(10, 1);
        assert!(sweep_t(&model, &[], &plan).is_err());
        assert!(sweep_t(&model, &[1.0, 0.5], &plan).is_err());
        assert!(sweep_t(&model, &[-1.0], &plan).is_err());
    }

    #[test]
    fn identical_degenerate_delays_always_consistent() {
        let d = Distribution::degenerate(3.0).unwrap();
        let curves =
            sweep_write_distribution(&d, std::slice::from_ref(&d), spec(3, 1, 1), &[0.0, 1.0], &RunPlan::new(5000, 2))
                .unwrap();
        assert!(curves[0].points.iter().all(|p| p.consistency.p_hat == 1.0));
    }

    #[test]
    fn single_replica_always_consistent() {
        let template = WarsModel::from_preset("lnkd-disk", spec(3, 1, 1)).unwrap();
        let out = sweep_replication(
            &template,
            &[1],
            &[0.0, 10.0],
            &RunPlan::new(20_000, 3),
            &TSearch::default(),
        )
        .unwrap();
        assert!(out[0].curve.points.iter().all(|p| p.consistency.p_hat == 1.0));
        assert_eq!(out[0].t_999, TVisibility::Reached { t_ms: 0.0 });
        assert!(!out[0].beyond_r_w_one);
    }

    #[test]
    fn replication_rejects_quorum_larger_than_n() {
        let template = WarsModel::from_preset("lnkd-disk", spec(3, 2, 1)).unwrap();
        let res = sweep_replication(&template, &[1], &[0.0], &RunPlan::new(10, 1), &TSearch::default());
        assert!(res.is_err());
    }

    #[test]
    fn sweeps_are_reproducible() {
        let model = WarsModel::from_preset("ymmr", spec(3, 1, 1)).unwrap();
        let grid = [0.0, 10.0, 100.0];
        let a = sweep_t(&model, &grid, &RunPlan::new(30_000, 77)).unwrap();
        let b = sweep_t(&model, &grid, &RunPlan::new(30_000, 77).sequential()).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.seed, a.trials), (77, 30_000));
    }
}
