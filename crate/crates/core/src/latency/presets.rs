use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Distribution;
use crate::error::{Error, Result};

/// One-way delay distributions of the WARS model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarsDistributions {
    /// Coordinator to replica, write request.
    pub w: Distribution,
    /// Replica to coordinator, write acknowledgement.
    pub a: Distribution,
    /// Coordinator to replica, read request.
    pub r: Distribution,
    /// Replica to coordinator, read response.
    pub s: Distribution,
}

impl WarsDistributions {
    pub fn symmetric(d: Distribution) -> Self {
        WarsDistributions {
            w: d.clone(),
            a: d.clone(),
            r: d.clone(),
            s: d,
        }
    }

    /// `W` drawn from `write`, `A`, `R` and `S` from `rest`.
    pub fn with_write(write: Distribution, rest: Distribution) -> Self {
        WarsDistributions {
            w: write,
            ..WarsDistributions::symmetric(rest)
        }
    }
}

/// Production latency fits: two-component Pareto body plus exponential tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// LinkedIn Voldemort on SSDs.
    LnkdSsd,
    /// LinkedIn Voldemort on spinning disks.
    LnkdDisk,
    /// Yammer Riak.
    Ymmr,
}

fn pareto_exp(body: f64, xm: f64, alpha: f64, tail: f64, lambda: f64) -> Distribution {
    Distribution::mixture(vec![
        (body, Distribution::pareto(xm, alpha).expect("valid pareto")),
        (tail, Distribution::exponential(lambda).expect("valid exponential")),
    ])
    .expect("valid mixture")
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::LnkdSsd, Preset::LnkdDisk, Preset::Ymmr];

    pub fn name(self) -> &'static str {
        match self {
            Preset::LnkdSsd => "lnkd-ssd",
            Preset::LnkdDisk => "lnkd-disk",
            Preset::Ymmr => "ymmr",
        }
    }

    pub fn distributions(self) -> WarsDistributions {
        let ssd = pareto_exp(0.9122, 0.235, 10.0, 0.0878, 1.66);
        match self {
            Preset::LnkdSsd => WarsDistributions::symmetric(ssd),
            Preset::LnkdDisk => WarsDistributions::with_write(pareto_exp(0.38, 1.05, 1.51, 0.62, 0.183), ssd),
            Preset::Ymmr => WarsDistributions::with_write(
                pareto_exp(0.939, 3.0, 3.35, 0.061, 0.0028),
                pareto_exp(0.982, 1.5, 3.8, 0.018, 0.0217),
            ),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('_', "-");
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}
