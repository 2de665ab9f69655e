//! Monte Carlo simulation of the WARS model.
//!
//! A trial draws one write-request (`W`), write-ack (`A`), read-request (`R`)
//! and read-response (`S`) delay per replica. The write commits at `w_t`, the
//! `w`-th smallest `W[i] + A[i]`. A read issued `t` ms after commit goes to
//! every replica and returns the first `r` responses, ordered by
//! `R[i] + S[i]`; it is stale when each of those replicas served the read
//! before the write reached it, i.e. `w_t + t + R[i] < W[i]`.
//!
//! The condition is linear in `t`, so a trial reduces to one *staleness
//! horizon* `h = min(W[i] - w_t - R[i])` over the read quorum: the read is
//! stale exactly when `t < h`. A batch of horizons therefore answers every
//! `t` from the same trials.

mod batch;
mod estimate;
mod trial;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::RunPlan;
use crate::latency::{Preset, WarsDistributions};
use crate::staleness::{PropagationProfile, QuorumSpec, VersionTolerance};

pub use batch::{
    isotonic_non_decreasing, LatencyTable, PercentilePoint, PercentileTable, TSearch, TrialBatch,
    TVisibility, STANDARD_PERCENTILES,
};
pub use estimate::{Estimate, WILSON_Z95};
pub use trial::TrialOutcome;

pub const DEFAULT_WAN_DELAY_MS: f64 = 75.0;

/// Names accepted by [`WarsModel::from_preset`].
pub const PRESET_NAMES: [&str; 4] = ["lnkd-ssd", "lnkd-disk", "ymmr", "wan"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Topology {
    /// All replicas in one datacenter; every delay drawn IID.
    #[default]
    Uniform,
    /// One replica per datacenter. Reads and writes originate in uniformly
    /// random datacenters; each one-way message to or from a remote replica
    /// is delayed by `remote_extra_ms` on top of its drawn delay.
    Wan {
        #[serde(default = "default_wan_delay")]
        remote_extra_ms: f64,
    },
}

fn default_wan_delay() -> f64 {
    DEFAULT_WAN_DELAY_MS
}

impl Topology {
    pub fn wan() -> Self {
        Topology::Wan {
            remote_extra_ms: DEFAULT_WAN_DELAY_MS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarsModel {
    spec: QuorumSpec,
    dists: WarsDistributions,
    topology: Topology,
}

impl WarsModel {
    pub fn new(spec: QuorumSpec, dists: WarsDistributions, topology: Topology) -> Result<Self> {
        if let Topology::Wan { remote_extra_ms } = topology {
            if !remote_extra_ms.is_finite() || remote_extra_ms < 0.0 {
                return Err(Error::config(format!(
                    "WAN remote delay must be non-negative and finite, got {remote_extra_ms}"
                )));
            }
        }
        Ok(WarsModel {
            spec,
            dists,
            topology,
        })
    }

    /// Builds a model from a preset name. `wan` is LNKD-DISK delays across one
    /// datacenter per replica with the default 75 ms remote delay.
    pub fn from_preset(name: &str, spec: QuorumSpec) -> Result<Self> {
        if name.eq_ignore_ascii_case("wan") {
            return WarsModel::new(spec, Preset::LnkdDisk.distributions(), Topology::wan());
        }
        let preset: Preset = name.parse()?;
        WarsModel::new(spec, preset.distributions(), Topology::Uniform)
    }

    pub fn spec(&self) -> QuorumSpec {
        self.spec
    }

    pub fn distributions(&self) -> &WarsDistributions {
        &self.dists
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn with_spec(&self, spec: QuorumSpec) -> Self {
        WarsModel {
            spec,
            ..self.clone()
        }
    }
}

/// Simulates one trial with the read issued `t_ms` after commit.
pub fn run_trial(
    model: &WarsModel,
    t_ms: f64,
    rng: &mut crate::rng::RandomSource,
) -> Result<TrialOutcome> {
    check_time(t_ms)?;
    Ok(trial::TrialEngine::new(model).outcome(t_ms, rng))
}

fn check_time(t_ms: f64) -> Result<()> {
    if t_ms.is_finite() && t_ms >= 0.0 {
        Ok(())
    } else {
        Err(Error::range(format!("t={t_ms} ms must be finite and non-negative")))
    }
}

fn check_trials(plan: &RunPlan) -> Result<()> {
    if plan.trials == 0 {
        Err(Error::config("trial count must be at least 1"))
    } else {
        Ok(())
    }
}

/// Fraction of trials whose read, issued `t_ms` after commit, is stale.
pub fn estimate_staleness(model: &WarsModel, t_ms: f64, plan: &RunPlan) -> Result<Estimate> {
    check_time(t_ms)?;
    check_trials(plan)?;
    let stale: u64 = plan
        .map_shards(|rng, trials| {
            let mut engine = trial::TrialEngine::new(model);
            (0..trials)
                .filter(|_| t_ms < engine.draw(rng).horizon)
                .count() as u64
        })
        .into_iter()
        .sum();
    Ok(Estimate::from_counts(stale, plan.trials))
}

/// Read and write operation latency percentiles.
pub fn estimate_latency(
    model: &WarsModel,
    plan: &RunPlan,
    extra_percentiles: &[f64],
) -> Result<LatencyTable> {
    TrialBatch::simulate(model, plan)?.latency(extra_percentiles)
}

/// Smallest `t` at which the consistency probability reaches `target`.
pub fn t_for_target(
    model: &WarsModel,
    target_consistency: f64,
    plan: &RunPlan,
    search: &TSearch,
) -> Result<TVisibility> {
    TrialBatch::simulate(model, plan)?.t_for_target(target_consistency, search)
}

/// Rule-of-thumb ⟨k,t⟩ bound: the t-visibility estimate and its interval
/// raised to the `k`th power. Not a multi-write simulation.
pub fn kt_estimate(
    model: &WarsModel,
    t_ms: f64,
    k: VersionTolerance,
    plan: &RunPlan,
) -> Result<Estimate> {
    Ok(estimate_staleness(model, t_ms, plan)?.powi(k.get()))
}

/// Measures `P_w(c, t)`: how often at least `c` replicas hold the write `t`
/// ms after commit. `t_grid` must start at 0 and increase strictly.
pub fn empirical_propagation_profile(
    model: &WarsModel,
    t_grid: &[f64],
    plan: &RunPlan,
) -> Result<PropagationProfile> {
    check_trials(plan)?;
    if t_grid.first() != Some(&0.0) {
        return Err(Error::config("propagation grid must start at t = 0"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::config("propagation grid must be finite and strictly increasing"));
    }
    let n = model.spec().n() as usize;
    let width = n + 1;
    let shards = plan.map_shards(|rng, trials| {
        let mut engine = trial::TrialEngine::new(model);
        let mut arrivals = Vec::with_capacity(n);
        // exactly[j * width + c]: trials with exactly c replicas holding the write at t_grid[j]
        let mut exactly = vec![0u64; t_grid.len() * width];
        for _ in 0..trials {
            engine.draw(rng);
            engine.arrivals_after_commit(&mut arrivals);
            let mut c = 0;
            for (j, &t) in t_grid.iter().enumerate() {
                while c < n && arrivals[c] <= t {
                    c += 1;
                }
                exactly[j * width + c] += 1;
            }
        }
        exactly
    });
    let mut exactly = vec![0u64; t_grid.len() * width];
    for shard in shards {
        for (acc, v) in exactly.iter_mut().zip(shard) {
            *acc += v;
        }
    }
    let total = plan.trials as f64;
    let rows = (0..t_grid.len())
        .map(|j| {
            let counts = &exactly[j * width..(j + 1) * width];
            let mut row = vec![0.0; width];
            let mut at_least = 0u64;
            for c in (0..width).rev() {
                at_least += counts[c];
                row[c] = at_least as f64 / total;
            }
            row
        })
        .collect();
    PropagationProfile::new(model.spec().n(), model.spec().w(), t_grid.to_vec(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::Distribution;
    use crate::rng::RandomSource;
    use crate::staleness::t_visibility_miss;

    fn spec(n: u32, r: u32, w: u32) -> QuorumSpec {
        QuorumSpec::new(n, r, w).unwrap()
    }

    fn zero_model(n: u32, r: u32, w: u32) -> WarsModel {
        WarsModel::new(
            spec(n, r, w),
            WarsDistributions::symmetric(Distribution::degenerate(0.0).unwrap()),
            Topology::Uniform,
        )
        .unwrap()
    }

    fn memoryless(lambda: f64) -> WarsModel {
        let zero = Distribution::degenerate(0.0).unwrap();
        WarsModel::new(
            spec(2, 1, 1),
            WarsDistributions::with_write(Distribution::exponential(lambda).unwrap(), zero),
            Topology::Uniform,
        )
        .unwrap()
    }

    #[test]
    fn zero_delays_never_stale() {
        let model = zero_model(5, 1, 1);
        let mut rng = RandomSource::new(1);
        for t in [0.0, 1.0, 100.0] {
            for _ in 0..1000 {
                let out = run_trial(&model, t, &mut rng).unwrap();
                assert!(!out.stale);
                assert_eq!(out.fresh_replica_count_at_read, 1);
            }
        }
        let profile =
            empirical_propagation_profile(&model, &[0.0, 1.0], &RunPlan::new(1000, 3)).unwrap();
        assert!(profile.rows().iter().flatten().all(|p| *p == 1.0));
    }

    #[test]
    fn strict_quorums_never_stale() {
        for name in PRESET_NAMES {
            let model = WarsModel::from_preset(name, spec(3, 2, 2)).unwrap();
            let est = estimate_staleness(&model, 0.0, &RunPlan::new(50_000, 2)).unwrap();
            assert_eq!(est.p_hat, 0.0, "{name}");
        }
    }

    #[test]
    fn memoryless_case_matches_closed_form() {
        let lambda = 0.5;
        let model = memoryless(lambda);
        for t in [0.0, 1.0 / lambda, 3.0 / lambda] {
            let est = estimate_staleness(&model, t, &RunPlan::new(200_000, 5)).unwrap();
            let expected = 0.5 * (-lambda * t).exp();
            assert!(
                (est.p_hat - expected).abs() < 3.0 * est.wilson_standard_error(),
                "t={t}: {} vs {expected}",
                est.p_hat
            );
        }
    }

    #[test]
    fn trial_outcome_fields_are_consistent() {
        let model = WarsModel::from_preset("lnkd-disk", spec(3, 1, 1)).unwrap();
        let mut rng = RandomSource::new(8);
        for _ in 0..10_000 {
            let out = run_trial(&model, 0.0, &mut rng).unwrap();
            assert!(out.write_commit_ms >= 0.0 && out.read_return_ms >= 0.0);
            assert!(out.fresh_replica_count_at_read <= 1);
            assert_eq!(out.stale, out.fresh_replica_count_at_read == 0);
        }
        assert!(run_trial(&model, -1.0, &mut rng).is_err());
    }

    #[test]
    fn k_power_of_estimate() {
        let model = memoryless(1.0);
        let plan = RunPlan::new(20_000, 1);
        let one = estimate_staleness(&model, 0.0, &plan).unwrap();
        assert_eq!(kt_estimate(&model, 0.0, VersionTolerance::ONE, &plan).unwrap(), one);
        let k = VersionTolerance::new(40).unwrap();
        assert!(kt_estimate(&model, 0.0, k, &plan).unwrap().p_hat < 1e-10);
    }

    #[test]
    fn profile_is_conservative_for_memoryless_case() {
        let model = memoryless(1.0);
        let plan = RunPlan::new(100_000, 4);
        let grid = [0.0, 0.5, 1.0, 2.0];
        let profile = empirical_propagation_profile(&model, &grid, &plan).unwrap();
        assert_eq!(profile.rows()[0][1], 1.0);
        for &t in &grid {
            let bound = t_visibility_miss(model.spec(), &profile, t).unwrap().value();
            let est = estimate_staleness(&model, t, &plan).unwrap();
            assert!(bound >= est.ci95_lo, "t={t}: {bound} < {}", est.ci95_lo);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let model = zero_model(3, 1, 1);
        assert!(estimate_staleness(&model, 0.0, &RunPlan::new(0, 1)).is_err());
        assert!(empirical_propagation_profile(&model, &[1.0], &RunPlan::new(10, 1)).is_err());
        assert!(empirical_propagation_profile(&model, &[0.0, 0.0], &RunPlan::new(10, 1)).is_err());
        assert!(WarsModel::new(
            spec(3, 1, 1),
            Preset::LnkdSsd.distributions(),
            Topology::Wan { remote_extra_ms: -1.0 }
        )
        .is_err());
        assert!(matches!(
            WarsModel::from_preset("nope", spec(3, 1, 1)),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn topology_json() {
        let wan: Topology = serde_json::from_str(r#"{"type":"wan"}"#).unwrap();
        assert_eq!(wan, Topology::wan());
        let uni: Topology = serde_json::from_str(r#"{"type":"uniform"}"#).unwrap();
        assert_eq!(uni, Topology::Uniform);
    }
}
