//! Operations shared by the command line and the HTTP service. Each takes a
//! scenario and returns the resolved scenario alongside the result, so both
//! front ends produce identical numbers for identical inputs.

use std::time::Instant;

use pbs::analysis::{
    all_pairs, sla_search, sweep_replication, sweep_t, sweep_write_distribution, tradeoff_table, Curve,
    ReplicationPoint, SlaReport, TradeoffTable,
};
use pbs::staleness::{
    k_staleness_miss, kt_staleness_miss, load_lower_bound, monotonic_reads_miss, quorum_miss_probability,
    t_visibility_miss, RateRatio,
};
use pbs::wars::{LatencyTable, TSearch, TrialBatch};
use pbs::{Estimate, TVisibility, VersionTolerance};
use serde::{Deserialize, Serialize};

use crate::config::{FieldError, ScenarioConfig, SweepAxis};

/// t-visibility target used when a sweep names none.
pub const DEFAULT_TARGET: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operation {
    ClosedForm,
    Estimate,
    Latency,
    Sweep,
    Table,
    Sla,
}

impl Operation {
    pub const ALL: [Operation; 6] = [
        Operation::ClosedForm,
        Operation::Estimate,
        Operation::Latency,
        Operation::Sweep,
        Operation::Table,
        Operation::Sla,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::ClosedForm => "closed-form",
            Operation::Estimate => "estimate",
            Operation::Latency => "latency",
            Operation::Sweep => "sweep",
            Operation::Table => "table",
            Operation::Sla => "sla",
        }
    }

    pub fn simulates(self) -> bool {
        self != Operation::ClosedForm
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Core(#[from] pbs::Error),
}

impl ApiError {
    /// Whether the caller can fix this by changing the request.
    pub fn is_client_error(&self) -> bool {
        match self {
            ApiError::Field(_) => true,
            ApiError::Core(e) => !matches!(e, pbs::Error::Io(_) | pbs::Error::Csv(_)),
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            ApiError::Field(e) => Some(&e.field),
            ApiError::Core(_) => None,
        }
    }
}

pub type ApiOutcome<T> = Result<(ScenarioConfig, T), ApiError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiResult<T> {
    /// The scenario as run, with every default it relied on made explicit.
    pub config: ScenarioConfig,
    pub result: T,
    pub timing: Timing,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormResult {
    /// `quorum`, `k_staleness`, `monotonic_reads`, `t_visibility` or `kt_staleness`.
    pub bound: String,
    pub p_stale: f64,
    pub p_consistent: f64,
    /// Single-version miss probability the bound is built from.
    pub epsilon: f64,
    /// Lower bound on quorum load at that `epsilon`.
    pub load_bound: f64,
}

pub fn closed_form(cfg: &ScenarioConfig) -> ApiOutcome<ClosedFormResult> {
    let spec = cfg.quorum()?;
    let k = cfg
        .k
        .map(|k| VersionTolerance::new(k).map_err(|e| FieldError::new("k", e.to_string())))
        .transpose()?;
    let (bound, p, epsilon) = if let Some(profile) = &cfg.profile {
        if cfg.ratio.is_some() {
            return Err(FieldError::new("ratio", "cannot be combined with a propagation profile").into());
        }
        let t = cfg.require_t()?;
        let eps = t_visibility_miss(spec, profile, t).map_err(|e| FieldError::new("profile", e.to_string()))?;
        match k {
            Some(k) => ("kt_staleness", kt_staleness_miss(spec, profile, t, k)?, eps),
            None => ("t_visibility", eps, eps),
        }
    } else if let Some(ratio) = cfg.ratio {
        if k.is_some() {
            return Err(FieldError::new("ratio", "cannot be combined with k").into());
        }
        let ratio = RateRatio::new(ratio).map_err(|e| FieldError::new("ratio", e.to_string()))?;
        let p = monotonic_reads_miss(spec, ratio, cfg.strict_monotonic.unwrap_or(false))
            .map_err(|e| FieldError::new("ratio", e.to_string()))?;
        ("monotonic_reads", p, quorum_miss_probability(spec))
    } else {
        let tol = k.unwrap_or(VersionTolerance::ONE);
        let bound = if k.is_some() { "k_staleness" } else { "quorum" };
        (bound, k_staleness_miss(spec, tol), quorum_miss_probability(spec))
    };
    let mut resolved = cfg.clone();
    if resolved.ratio.is_some() {
        resolved.strict_monotonic.get_or_insert(false);
    }
    Ok((
        resolved,
        ClosedFormResult {
            bound: bound.to_string(),
            p_stale: p.value(),
            p_consistent: p.consistency(),
            epsilon: epsilon.value(),
            load_bound: load_lower_bound(epsilon, spec.n())?,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetTime {
    pub target: f64,
    pub t_visibility: TVisibility,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KtBound {
    pub k: u32,
    /// Staleness estimate raised to the `k`th power.
    pub p_stale: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub t_ms: f64,
    pub p_stale: f64,
    pub p_consistent: f64,
    pub staleness: Estimate,
    pub consistency: Estimate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kt: Option<KtBound>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_visibility: Vec<TargetTime>,
}

fn search_of(resolved: &mut ScenarioConfig) -> TSearch {
    *resolved.search.get_or_insert_with(TSearch::default)
}

pub fn estimate(cfg: &ScenarioConfig) -> ApiOutcome<EstimateResult> {
    let model = cfg.model()?;
    let plan = cfg.plan()?;
    let t_ms = cfg.require_t()?;
    let targets = cfg.checked_targets()?;
    let k = cfg
        .k
        .map(|k| VersionTolerance::new(k).map_err(|e| FieldError::new("k", e.to_string())))
        .transpose()?;
    let mut resolved = cfg.clone();
    resolved.pin_topology()?;

    let batch = TrialBatch::simulate(&model, &plan)?;
    let staleness = batch.staleness_at(t_ms)?;
    let t_visibility = if targets.is_empty() {
        Vec::new()
    } else {
        let search = search_of(&mut resolved);
        targets
            .iter()
            .map(|&target| {
                Ok(TargetTime {
                    target,
                    t_visibility: batch.t_for_target(target, &search)?,
                })
            })
            .collect::<Result<_, pbs::Error>>()?
    };
    let result = EstimateResult {
        t_ms,
        p_stale: staleness.p_hat,
        p_consistent: 1.0 - staleness.p_hat,
        staleness,
        consistency: staleness.complement(),
        kt: k.map(|k| KtBound {
            k: k.get(),
            p_stale: staleness.powi(k.get()),
        }),
        t_visibility,
    };
    Ok((resolved, result))
}

pub fn latency(cfg: &ScenarioConfig) -> ApiOutcome<LatencyTable> {
    let model = cfg.model()?;
    let plan = cfg.plan()?;
    let mut resolved = cfg.clone();
    resolved.pin_topology()?;
    let extra = cfg.percentiles.clone().unwrap_or_default();
    let table = TrialBatch::simulate(&model, &plan)?
        .latency(&extra)
        .map_err(|e| FieldError::new("percentiles", e.to_string()))?;
    Ok((resolved, table))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub label: String,
    pub target: f64,
    /// Interpolated on the curve's own grid; absent if the grid never reaches
    /// the target.
    pub t_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum SweepResult {
    T { curves: Vec<Curve>, crossings: Vec<Crossing> },
    N { points: Vec<ReplicationPoint>, crossings: Vec<Crossing> },
    WriteDistribution { curves: Vec<Curve>, crossings: Vec<Crossing> },
    Rw { table: TradeoffTable },
}

impl SweepResult {
    pub fn crossings(&self) -> &[Crossing] {
        match self {
            SweepResult::T { crossings, .. }
            | SweepResult::N { crossings, .. }
            | SweepResult::WriteDistribution { crossings, .. } => crossings,
            SweepResult::Rw { .. } => &[],
        }
    }
}

fn crossings<'a>(curves: impl IntoIterator<Item = &'a Curve>, targets: &[f64]) -> Vec<Crossing> {
    curves
        .into_iter()
        .flat_map(|c| {
            targets.iter().map(move |&target| Crossing {
                label: c.label.clone(),
                target,
                t_ms: c.crossing(target),
            })
        })
        .collect()
}

pub fn sweep(cfg: &ScenarioConfig) -> ApiOutcome<SweepResult> {
    // Without a sweep block, sweep over t.
    let axis = cfg.sweep.clone().unwrap_or(SweepAxis::T);
    let plan = cfg.plan()?;
    let mut resolved = cfg.clone();
    resolved.sweep = Some(axis.clone());
    if let SweepAxis::Rw { pairs } = &axis {
        let (resolved, table) = run_table(cfg, pairs.clone())?;
        return Ok((resolved, SweepResult::Rw { table }));
    }
    let grid = cfg.require_grid()?;
    let targets = match cfg.checked_targets()? {
        t if t.is_empty() => vec![DEFAULT_TARGET],
        t => t,
    };
    resolved.targets = Some(targets.clone());
    let result = match axis {
        SweepAxis::T => {
            let model = cfg.model()?;
            resolved.pin_topology()?;
            let curve = sweep_t(&model, grid, &plan)?;
            let crossings = crossings([&curve], &targets);
            SweepResult::T {
                curves: vec![curve],
                crossings,
            }
        }
        SweepAxis::N { values } => {
            if values.is_empty() {
                return Err(FieldError::new("sweep.values", "must not be empty").into());
            }
            let template = cfg.model()?;
            for (i, &n) in values.iter().enumerate() {
                if n < template.spec().r().max(template.spec().w()) {
                    return Err(FieldError::new(
                        format!("sweep.values[{i}]"),
                        format!("n={n} is smaller than the configured quorums"),
                    )
                    .into());
                }
            }
            resolved.pin_topology()?;
            let search = search_of(&mut resolved);
            let points = sweep_replication(&template, &values, grid, &plan, &search)?;
            let crossings = crossings(points.iter().map(|p| &p.curve), &targets);
            SweepResult::N { points, crossings }
        }
        SweepAxis::WriteDistribution { values } => {
            if values.is_empty() {
                return Err(FieldError::new("sweep.values", "must not be empty").into());
            }
            let spec = cfg.quorum()?;
            let (dists, topology) = cfg.latency_model()?;
            if dists.a != dists.r || dists.a != dists.s {
                return Err(FieldError::new(
                    "distributions",
                    "write-distribution sweeps need identical A, R and S delays",
                )
                .into());
            }
            if topology != pbs::Topology::Uniform {
                return Err(FieldError::new("topology", "write-distribution sweeps use a uniform topology").into());
            }
            resolved.topology = Some(topology);
            let curves = sweep_write_distribution(&dists.a, &values, spec, grid, &plan)?;
            let crossings = crossings(&curves, &targets);
            SweepResult::WriteDistribution { curves, crossings }
        }
        SweepAxis::Rw { .. } => unreachable!("handled above"),
    };
    Ok((resolved, result))
}

fn run_table(cfg: &ScenarioConfig, pairs: Option<Vec<(u32, u32)>>) -> ApiOutcome<TradeoffTable> {
    let n = cfg.require_n()?;
    let plan = cfg.plan()?;
    let (dists, topology) = cfg.latency_model()?;
    let pairs = pairs.unwrap_or_else(|| all_pairs(n));
    if pairs.is_empty() {
        return Err(FieldError::new("sweep.pairs", "must not be empty").into());
    }
    for (i, &(r, w)) in pairs.iter().enumerate() {
        if r == 0 || w == 0 || r > n || w > n {
            return Err(FieldError::new(format!("sweep.pairs[{i}]"), format!("({r}, {w}) must lie in [1, n={n}]")).into());
        }
    }
    let template = pbs::WarsModel::new(
        pbs::QuorumSpec::new(n, pairs[0].0, pairs[0].1)?,
        dists,
        topology,
    )?;
    let mut resolved = cfg.clone();
    resolved.topology = Some(topology);
    resolved.sweep = Some(SweepAxis::Rw {
        pairs: Some(pairs.clone()),
    });
    let search = search_of(&mut resolved);
    let table = tradeoff_table(&template, &pairs, &plan, &search)?;
    Ok((resolved, table))
}

/// Trade-off table at the configured `n`: the pairs listed in an `rw` sweep
/// block, or every `(r, w)`.
pub fn table(cfg: &ScenarioConfig) -> ApiOutcome<TradeoffTable> {
    let pairs = match &cfg.sweep {
        Some(SweepAxis::Rw { pairs }) => pairs.clone(),
        _ => None,
    };
    run_table(cfg, pairs)
}

pub fn sla(cfg: &ScenarioConfig) -> ApiOutcome<SlaReport> {
    let constraint = cfg.sla.clone().ok_or_else(|| FieldError::new("sla", "required"))?;
    let plan = cfg.plan()?;
    let (dists, topology) = cfg.latency_model()?;
    let mut resolved = cfg.clone();
    resolved.topology = Some(topology);
    let report = sla_search(&dists, topology, &constraint, &plan).map_err(|e| match e {
        pbs::Error::Config(msg) => ApiError::Field(FieldError::new("sla", msg)),
        other => other.into(),
    })?;
    Ok((resolved, report))
}

/// Runs `op` and wraps its result with the resolved scenario and timing.
pub fn execute(op: Operation, cfg: &ScenarioConfig) -> Result<ApiResult<serde_json::Value>, ApiError> {
    let start = Instant::now();
    fn pack<T: Serialize>(out: ApiOutcome<T>) -> Result<(ScenarioConfig, serde_json::Value), ApiError> {
        let (cfg, result) = out?;
        Ok((cfg, serde_json::to_value(result).map_err(pbs::Error::from)?))
    }
    let (config, result) = match op {
        Operation::ClosedForm => pack(closed_form(cfg)),
        Operation::Estimate => pack(estimate(cfg)),
        Operation::Latency => pack(latency(cfg)),
        Operation::Sweep => pack(sweep(cfg)),
        Operation::Table => pack(table(cfg)),
        Operation::Sla => pack(sla(cfg)),
    }?;
    Ok(ApiResult {
        config,
        result,
        timing: Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        warnings: Vec::new(),
    })
}
