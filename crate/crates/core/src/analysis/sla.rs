use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{derive_seed, RunPlan};
use crate::latency::WarsDistributions;
use crate::staleness::QuorumSpec;
use crate::wars::{Estimate, Topology, TrialBatch, WarsModel};

/// What to minimize among configurations meeting the staleness bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    Read,
    Write,
    Weighted { read_weight: f64, write_weight: f64 },
}

impl Objective {
    /// Read plus write latency.
    pub const COMBINED: Objective = Objective::Weighted {
        read_weight: 1.0,
        write_weight: 1.0,
    };

    fn value(&self, read_ms: f64, write_ms: f64) -> f64 {
        match *self {
            Objective::Read => read_ms,
            Objective::Write => write_ms,
            Objective::Weighted {
                read_weight,
                write_weight,
            } => read_weight * read_ms + write_weight * write_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlaConstraint {
    /// Required probability of a consistent read at `at_t_ms`.
    pub min_consistency: f64,
    pub at_t_ms: f64,
    /// Latency percentile the objective is evaluated at, e.g. 99.9.
    pub latency_percentile: f64,
    pub objective: Objective,
    pub min_w_for_durability: u32,
    pub n_min: u32,
    pub n_max: u32,
}

impl SlaConstraint {
    fn validate(&self) -> Result<()> {
        if !(self.min_consistency > 0.0 && self.min_consistency <= 1.0) {
            return Err(Error::config(format!(
                "min_consistency {} must be in (0, 1]",
                self.min_consistency
            )));
        }
        if !(self.at_t_ms.is_finite() && self.at_t_ms >= 0.0) {
            return Err(Error::config("at_t_ms must be finite and non-negative"));
        }
        if !(self.latency_percentile > 0.0 && self.latency_percentile <= 100.0) {
            return Err(Error::config("latency_percentile must be in (0, 100]"));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::config(format!(
                "replica range [{}, {}] is empty",
                self.n_min, self.n_max
            )));
        }
        if self.min_w_for_durability == 0 {
            return Err(Error::config("min_w_for_durability must be at least 1"));
        }
        if let Objective::Weighted {
            read_weight,
            write_weight,
        } = self.objective
        {
            let ok = |x: f64| x.is_finite() && x >= 0.0;
            if !ok(read_weight) || !ok(write_weight) || read_weight + write_weight == 0.0 {
                return Err(Error::config("objective weights must be non-negative, not both zero"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlaCandidate {
    pub n: u32,
    pub r: u32,
    pub w: u32,
    pub consistency: Estimate,
    pub read_ms: f64,
    pub write_ms: f64,
    pub objective_ms: f64,
    /// `r + w > n`: consistent by construction.
    pub strict: bool,
    pub feasible: bool,
}

impl SlaCandidate {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.objective_ms
            .total_cmp(&other.objective_ms)
            .then((self.n, self.r, self.w).cmp(&(other.n, other.r, other.w)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SlaOutcome {
    Feasible { winner: SlaCandidate },
    /// No configuration met the bound; `closest` has the highest consistency
    /// lower bound among those evaluated, if any were.
    Infeasible { closest: Option<SlaCandidate> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlaReport {
    pub seed: u64,
    pub trials: u64,
    pub constraint: SlaConstraint,
    /// Feasible configurations, best first.
    pub ranked: Vec<SlaCandidate>,
    /// Every configuration evaluated, in enumeration order.
    pub evaluated: Vec<SlaCandidate>,
    pub outcome: SlaOutcome,
}

impl SlaReport {
    pub fn winner(&self) -> Option<&SlaCandidate> {
        match &self.outcome {
            SlaOutcome::Feasible { winner } => Some(winner),
            SlaOutcome::Infeasible { .. } => None,
        }
    }
}

/// Exhaustive search over `(n, r, w)` for the lowest-latency configuration
/// whose consistency at `at_t_ms` meets `min_consistency`.
///
/// Feasibility uses the lower end of the 95% interval, so answers err on the
/// side of consistency. Strict quorums are feasible without sampling error.
pub fn sla_search(
    dists: &WarsDistributions,
    topology: Topology,
    constraint: &SlaConstraint,
    plan: &RunPlan,
) -> Result<SlaReport> {
    constraint.validate()?;
    let mut evaluated = Vec::new();
    let mut index = 0u64;
    for n in constraint.n_min..=constraint.n_max {
        for w in constraint.min_w_for_durability..=n {
            for r in 1..=n {
                let spec = QuorumSpec::new(n, r, w)?;
                let model = WarsModel::new(spec, dists.clone(), topology)?;
                let batch = TrialBatch::simulate(&model, &plan.with_seed(derive_seed(plan.seed, index)))?;
                index += 1;
                let consistency = batch.consistency_at(constraint.at_t_ms)?;
                let read_ms = batch.read_percentile(constraint.latency_percentile)?;
                let write_ms = batch.write_percentile(constraint.latency_percentile)?;
                let strict = spec.is_strict();
                evaluated.push(SlaCandidate {
                    n,
                    r,
                    w,
                    consistency,
                    read_ms,
                    write_ms,
                    objective_ms: constraint.objective.value(read_ms, write_ms),
                    strict,
                    feasible: strict || consistency.ci95_lo >= constraint.min_consistency,
                });
            }
        }
    }
    let mut ranked: Vec<SlaCandidate> = evaluated.iter().filter(|c| c.feasible).cloned().collect();
    ranked.sort_by(SlaCandidate::rank_cmp);
    let outcome = match ranked.first() {
        Some(best) => SlaOutcome::Feasible {
            winner: best.clone(),
        },
        None => SlaOutcome::Infeasible {
            closest: evaluated
                .iter()
                .max_by(|a, b| {
                    a.consistency
                        .ci95_lo
                        .total_cmp(&b.consistency.ci95_lo)
                        .then(b.rank_cmp(a))
                })
                .cloned(),
        },
    };
    Ok(SlaReport {
        seed: plan.seed,
        trials: plan.trials,
        constraint: constraint.clone(),
        ranked,
        evaluated,
        outcome,
    })
}
