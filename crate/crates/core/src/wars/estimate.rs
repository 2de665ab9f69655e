use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const WILSON_Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo probability estimate with a Wilson score 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub trials: u64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials, "{successes} of {trials} trials");
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = WILSON_Z95 * WILSON_Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = WILSON_Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Estimate {
            p_hat: p,
            trials,
            ci95_lo: (center - half).clamp(0.0, p),
            ci95_hi: (center + half).clamp(p, 1.0),
        }
    }

    /// Estimate of the complementary event (e.g. consistency from staleness).
    pub fn complement(&self) -> Self {
        Estimate {
            p_hat: 1.0 - self.p_hat,
            trials: self.trials,
            ci95_lo: 1.0 - self.ci95_hi,
            ci95_hi: 1.0 - self.ci95_lo,
        }
    }

    /// Point estimate and interval endpoints raised to `k`.
    pub fn powi(&self, k: u32) -> Self {
        let k = k as i32;
        Estimate {
            p_hat: self.p_hat.powi(k),
            trials: self.trials,
            ci95_lo: self.ci95_lo.powi(k),
            ci95_hi: self.ci95_hi.powi(k),
        }
    }

    /// Interval half-width expressed in standard errors of one.
    pub fn wilson_standard_error(&self) -> f64 {
        (self.ci95_hi - self.ci95_lo) / (2.0 * WILSON_Z95)
    }

    pub fn ci_width(&self) -> f64 {
        self.ci95_hi - self.ci95_lo
    }
}
