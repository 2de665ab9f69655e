//! Scenario files: one JSON document naming a model, a run plan and the
//! parameters of whichever operation is run against it.

use std::fmt;
use std::path::Path;

use pbs::analysis::SlaConstraint;
use pbs::wars::TSearch;
use pbs::{Distribution, Preset, PropagationProfile, QuorumSpec, RunPlan, Topology, WarsDistributions, WarsModel};
use serde::{Deserialize, Serialize};

/// Problem with one named field of a scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }

    fn required(field: &str) -> Self {
        FieldError::new(field, "required")
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for FieldError {}

/// Which parameter a sweep varies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepAxis {
    /// Time after commit, over `t_grid`.
    T,
    /// Replica count; R and W stay as configured.
    N { values: Vec<u32> },
    /// Write-request delay `W`; `A`, `R` and `S` stay as configured.
    WriteDistribution { values: Vec<Distribution> },
    /// Every listed `(r, w)` pair at the configured `n`; all pairs if omitted.
    Rw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pairs: Option<Vec<(u32, u32)>>,
    },
}

/// A model plus everything needed to run one operation on it.
///
/// Fields an operation does not use are ignored. Responses echo the config
/// with every default the operation relied on filled in, so the echo alone
/// reproduces the result.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<u32>,
    /// One of `lnkd-ssd`, `lnkd-disk`, `ymmr`, `wan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distributions: Option<WarsDistributions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    /// Consistency levels to find t-visibility for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Writes per read, for monotonic-reads bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict_monotonic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PropagationProfile>,
    /// Extra latency percentiles beyond the standard set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percentiles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sla: Option<SlaConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<TSearch>,
}

/// Parses a scenario, naming the offending field on failure.
pub fn parse_scenario(json: &[u8]) -> Result<ScenarioConfig, FieldError> {
    let de = &mut serde_json::Deserializer::from_slice(json);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        FieldError::new(field, e.into_inner().to_string())
    })
}

pub fn load_scenario(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let bytes = std::fs::read(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    parse_scenario(&bytes).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn model_preset(name: &str) -> Result<(WarsDistributions, Option<Topology>), FieldError> {
    if name.eq_ignore_ascii_case("wan") {
        return Ok((Preset::LnkdDisk.distributions(), Some(Topology::wan())));
    }
    name.parse::<Preset>()
        .map(|p| (p.distributions(), None))
        .map_err(|_| FieldError::new("preset", format!("unknown preset {name:?}; expected one of {:?}", pbs::wars::PRESET_NAMES)))
}

fn finite_non_negative(field: &str, v: f64) -> Result<f64, FieldError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(FieldError::new(field, format!("{v} must be finite and non-negative")))
    }
}

impl ScenarioConfig {
    pub fn require_n(&self) -> Result<u32, FieldError> {
        match self.n {
            None => Err(FieldError::required("n")),
            Some(0) => Err(FieldError::new("n", "must be at least 1")),
            Some(n) => Ok(n),
        }
    }

    pub fn quorum(&self) -> Result<QuorumSpec, FieldError> {
        let n = self.require_n()?;
        let check = |field: &str, v: Option<u32>| match v {
            None => Err(FieldError::required(field)),
            Some(v) if v == 0 || v > n => Err(FieldError::new(field, format!("{v} must be in [1, n={n}]"))),
            Some(v) => Ok(v),
        };
        let r = check("r", self.r)?;
        let w = check("w", self.w)?;
        QuorumSpec::new(n, r, w).map_err(|e| FieldError::new("n", e.to_string()))
    }

    /// Delay distributions and topology, from the preset or explicit fields.
    pub fn latency_model(&self) -> Result<(WarsDistributions, Topology), FieldError> {
        let (dists, implied) = match (&self.preset, &self.distributions) {
            (Some(_), Some(_)) => {
                return Err(FieldError::new("preset", "give either preset or distributions, not both"))
            }
            (None, None) => return Err(FieldError::new("preset", "one of preset or distributions is required")),
            (Some(name), None) => model_preset(name)?,
            (None, Some(d)) => (d.clone(), None),
        };
        let topology = self.topology.or(implied).unwrap_or_default();
        if let Topology::Wan { remote_extra_ms } = topology {
            finite_non_negative("topology.remote_extra_ms", remote_extra_ms)?;
        }
        Ok((dists, topology))
    }

    pub fn model(&self) -> Result<WarsModel, FieldError> {
        let spec = self.quorum()?;
        let (dists, topology) = self.latency_model()?;
        WarsModel::new(spec, dists, topology).map_err(|e| FieldError::new("distributions", e.to_string()))
    }

    pub fn plan(&self) -> Result<RunPlan, FieldError> {
        let trials = match self.trials {
            None => return Err(FieldError::required("trials")),
            Some(0) => return Err(FieldError::new("trials", "must be at least 1")),
            Some(t) => t,
        };
        let seed = self.seed.ok_or_else(|| FieldError::required("seed"))?;
        Ok(RunPlan::new(trials, seed))
    }

    pub fn require_t(&self) -> Result<f64, FieldError> {
        finite_non_negative("t_ms", self.t_ms.ok_or_else(|| FieldError::required("t_ms"))?)
    }

    pub fn require_grid(&self) -> Result<&[f64], FieldError> {
        let grid = self.t_grid.as_deref().ok_or_else(|| FieldError::required("t_grid"))?;
        if grid.is_empty() {
            return Err(FieldError::new("t_grid", "must not be empty"));
        }
        for (i, &t) in grid.iter().enumerate() {
            finite_non_negative(&format!("t_grid[{i}]"), t)?;
        }
        if grid.windows(2).any(|p| p[0] >= p[1]) {
            return Err(FieldError::new("t_grid", "must be strictly increasing"));
        }
        Ok(grid)
    }

    pub fn checked_targets(&self) -> Result<Vec<f64>, FieldError> {
        let targets = self.targets.clone().unwrap_or_default();
        for (i, &c) in targets.iter().enumerate() {
            if !(c > 0.0 && c < 1.0) {
                return Err(FieldError::new(format!("targets[{i}]"), format!("{c} must be in (0, 1)")));
            }
        }
        Ok(targets)
    }

    /// Fills in the topology the model resolved to, so the echo is explicit.
    pub(crate) fn pin_topology(&mut self) -> Result<(), FieldError> {
        let (_, topology) = self.latency_model()?;
        self.topology = Some(topology);
        Ok(())
    }
}
