//! Closed-form staleness probabilities for partial quorum systems.
//!
//! Every function here is pure. Binomial ratios are evaluated exactly as
//! big rationals and converted to `f64` at the end, so large systems such as
//! `n = 100, r = w = 30` neither overflow nor lose precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `(N, R, W)` replication configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawQuorum")]
pub struct QuorumSpec {
    n: u32,
    r: u32,
    w: u32,
}

#[derive(Deserialize)]
struct RawQuorum {
    n: u32,
    r: u32,
    w: u32,
}

impl TryFrom<RawQuorum> for QuorumSpec {
    type Error = Error;

    fn try_from(raw: RawQuorum) -> Result<Self> {
        QuorumSpec::new(raw.n, raw.r, raw.w)
    }
}

impl QuorumSpec {
    pub fn new(n: u32, r: u32, w: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("replica count n must be at least 1"));
        }
        if r == 0 || r > n {
            return Err(Error::config(format!("read quorum r={r} must be in [1, n={n}]")));
        }
        if w == 0 || w > n {
            return Err(Error::config(format!("write quorum w={w} must be in [1, n={n}]")));
        }
        Ok(QuorumSpec { n, r, w })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    /// Every read quorum intersects every write quorum.
    pub fn is_strict(&self) -> bool {
        self.r + self.w > self.n
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        QuorumSpec::new(n, self.r, self.w)
    }

    pub fn with_rw(&self, r: u32, w: u32) -> Result<Self> {
        QuorumSpec::new(self.n, r, w)
    }
}

impl std::fmt::Display for QuorumSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "N={} R={} W={}", self.n, self.r, self.w)
    }
}

/// A probability of reading stale data.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StalenessProbability(f64);

impl StalenessProbability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(StalenessProbability(value))
        } else {
            Err(Error::domain(format!("probability {value} is not in [0, 1]")))
        }
    }

    // Clamps rounding spill from sums of products of probabilities.
    fn clamped(value: f64) -> Self {
        StalenessProbability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn consistency(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for StalenessProbability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        StalenessProbability::new(value)
    }
}

impl From<StalenessProbability> for f64 {
    fn from(p: StalenessProbability) -> f64 {
        p.0
    }
}

/// Tolerated number of versions behind the latest (`k ≥ 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct VersionTolerance(u32);

impl VersionTolerance {
    pub const ONE: VersionTolerance = VersionTolerance(1);

    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("version tolerance k must be at least 1"));
        }
        Ok(VersionTolerance(k))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for VersionTolerance {
    type Error = Error;

    fn try_from(k: u32) -> Result<Self> {
        VersionTolerance::new(k)
    }
}

impl From<VersionTolerance> for u32 {
    fn from(k: VersionTolerance) -> u32 {
        k.0
    }
}

/// Global write rate divided by a client's read rate for one key.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RateRatio(f64);

impl RateRatio {
    pub fn new(writes_per_read: f64) -> Result<Self> {
        if writes_per_read.is_finite() && writes_per_read >= 0.0 {
            Ok(RateRatio(writes_per_read))
        } else {
            Err(Error::domain(format!(
                "writes-per-read ratio {writes_per_read} must be finite and non-negative"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RateRatio {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        RateRatio::new(v)
    }
}

impl From<RateRatio> for f64 {
    fn from(r: RateRatio) -> f64 {
        r.0
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        // Exact at every step: acc * (n - i) is divisible by (i + 1).
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `C(n - fresh, r) / C(n, r)`: probability that a uniformly random read
/// quorum of size `r` contains none of `fresh` up-to-date replicas.
pub fn exact_read_miss_ratio(n: u32, r: u32, fresh: u32) -> BigRational {
    if fresh > n {
        return BigRational::zero();
    }
    BigRational::new(binomial(n - fresh, r), binomial(n, r))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational form of [`quorum_miss_probability`].
pub fn exact_quorum_miss(spec: QuorumSpec) -> BigRational {
    exact_read_miss_ratio(spec.n, spec.r, spec.w)
}

/// Probability that a random read quorum misses a random write quorum.
pub fn quorum_miss_probability(spec: QuorumSpec) -> StalenessProbability {
    StalenessProbability::clamped(to_f64(&exact_quorum_miss(spec)))
}

/// Probability of returning a value older than the last `k` committed versions,
/// with no write propagation beyond the write quorum.
pub fn k_staleness_miss(spec: QuorumSpec, tol: VersionTolerance) -> StalenessProbability {
    let p = quorum_miss_probability(spec).value();
    StalenessProbability::clamped(p.powf(f64::from(tol.get())))
}

/// Probability of violating monotonic reads given the write/read rate ratio.
///
/// Non-strict mode tolerates `1 + ratio` versions; strict mode tolerates only
/// `ratio` versions and therefore needs `ratio ≥ 1`. The exponent may be
/// fractional.
pub fn monotonic_reads_miss(
    spec: QuorumSpec,
    ratio: RateRatio,
    strict: bool,
) -> Result<StalenessProbability> {
    let k = if strict {
        if ratio.get() < 1.0 {
            return Err(Error::domain(format!(
                "strict monotonic reads needs writes-per-read ≥ 1, got {}",
                ratio.get()
            )));
        }
        ratio.get()
    } else {
        1.0 + ratio.get()
    };
    let p = quorum_miss_probability(spec).value();
    Ok(StalenessProbability::clamped(p.powf(k)))
}

/// Per-quorum non-intersection probability `ε` that yields overall miss
/// probability `p` when `k` versions are tolerated: `p^(1/k)`.
pub fn epsilon_for_tolerance(p: StalenessProbability, tol: VersionTolerance) -> StalenessProbability {
    StalenessProbability::clamped(p.value().powf(1.0 / f64::from(tol.get())))
}

/// Lower bound `(1 - ε) / √n` on the load of an ε-intersecting quorum system.
pub fn load_lower_bound(epsilon: StalenessProbability, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::config("replica count n must be at least 1"));
    }
    Ok((1.0 - epsilon.value()) / f64::from(n).sqrt())
}

/// Load bound for a k-staleness construction with overall miss probability `p`:
/// `(1 - p^(1/k)) / √n`.
pub fn k_staleness_load_bound(p: StalenessProbability, tol: VersionTolerance, n: u32) -> Result<f64> {
    load_lower_bound(epsilon_for_tolerance(p, tol), n)
}

/// `P_w(c, t)`: probability that at least `c` replicas hold a version `t` ms
/// after it commits, tabulated on a time grid for `c ∈ [0, n]`.
///
/// Values between grid times are linearly interpolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct PropagationProfile {
    n: u32,
    w_base: u32,
    times_ms: Vec<f64>,
    /// `at_least[j][c]` for grid time `j`, `c ∈ [0, n]`.
    at_least: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawProfile {
    n: u32,
    w_base: u32,
    times_ms: Vec<f64>,
    at_least: Vec<Vec<f64>>,
}

impl TryFrom<RawProfile> for PropagationProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        PropagationProfile::new(raw.n, raw.w_base, raw.times_ms, raw.at_least)
    }
}

const PROFILE_TOLERANCE: f64 = 1e-12;

impl PropagationProfile {
    pub fn new(n: u32, w_base: u32, times_ms: Vec<f64>, at_least: Vec<Vec<f64>>) -> Result<Self> {
        if w_base == 0 || w_base > n {
            return Err(Error::config(format!("w_base={w_base} must be in [1, n={n}]")));
        }
        if times_ms.is_empty() || times_ms.len() != at_least.len() {
            return Err(Error::config("profile needs one row per grid time and at least one time"));
        }
        if times_ms.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::config("profile grid times must be finite and non-negative"));
        }
        if times_ms.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::config("profile grid times must be strictly increasing"));
        }
        let width = n as usize + 1;
        for (j, row) in at_least.iter().enumerate() {
            if row.len() != width {
                return Err(Error::config(format!(
                    "profile row {j} has {} entries, expected n + 1 = {width}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
                return Err(Error::config(format!("profile row {j} has a value outside [0, 1]")));
            }
            if (row[0] - 1.0).abs() > PROFILE_TOLERANCE {
                return Err(Error::config(format!("profile row {j}: P_w(0, t) must be 1")));
            }
            if row.windows(2).any(|p| p[1] > p[0] + PROFILE_TOLERANCE) {
                return Err(Error::config(format!("profile row {j} increases in c")));
            }
        }
        if times_ms[0] == 0.0
            && at_least[0][..=w_base as usize]
                .iter()
                .any(|p| (p - 1.0).abs() > PROFILE_TOLERANCE)
        {
            return Err(Error::config("P_w(c, 0) must be 1 for every c ≤ w_base"));
        }
        for c in 0..width {
            if at_least.windows(2).any(|rows| rows[1][c] + PROFILE_TOLERANCE < rows[0][c]) {
                return Err(Error::config(format!("profile decreases in t for c={c}")));
            }
        }
        Ok(PropagationProfile {
            n,
            w_base,
            times_ms,
            at_least,
        })
    }

    /// Writes stay on exactly `w` replicas forever.
    pub fn frozen(spec: QuorumSpec, times_ms: Vec<f64>) -> Result<Self> {
        let row: Vec<f64> = (0..=spec.n)
            .map(|c| if c <= spec.w { 1.0 } else { 0.0 })
            .collect();
        let rows = vec![row; times_ms.len()];
        PropagationProfile::new(spec.n, spec.w, times_ms, rows)
    }

    /// Every replica holds the write at every grid time.
    pub fn fully_propagated(spec: QuorumSpec, times_ms: Vec<f64>) -> Result<Self> {
        let rows = vec![vec![1.0; spec.n as usize + 1]; times_ms.len()];
        PropagationProfile::new(spec.n, spec.w, times_ms, rows)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn w_base(&self) -> u32 {
        self.w_base
    }

    pub fn times_ms(&self) -> &[f64] {
        &self.times_ms
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.at_least
    }

    /// `P_w(c, t)` for every `c ∈ [0, n]` at time `t`, interpolated.
    pub fn at(&self, t_ms: f64) -> Result<Vec<f64>> {
        let first = self.times_ms[0];
        let last = *self.times_ms.last().expect("non-empty grid");
        if !(t_ms >= first && t_ms <= last) {
            return Err(Error::range(format!(
                "t={t_ms} ms is outside the profile grid [{first}, {last}]"
            )));
        }
        let hi = self.times_ms.partition_point(|&g| g < t_ms);
        if self.times_ms[hi] == t_ms {
            return Ok(self.at_least[hi].clone());
        }
        let lo = hi - 1;
        let frac = (t_ms - self.times_ms[lo]) / (self.times_ms[hi] - self.times_ms[lo]);
        Ok(self.at_least[lo]
            .iter()
            .zip(&self.at_least[hi])
            .map(|(a, b)| a + frac * (b - a))
            .collect())
    }
}

/// Probability that a read issued `t` ms after commit misses every replica
/// holding the write, assuming instantaneous reads.
///
/// Sums, over the number `c ≥ w` of replicas holding the write at `t`, the
/// probability mass `P_w(c, t) - P_w(c + 1, t)` times `C(n - c, r) / C(n, r)`.
/// Read and acknowledgement delays only add propagation time, so this is a
/// conservative upper bound on real t-visibility staleness.
pub fn t_visibility_miss(
    spec: QuorumSpec,
    profile: &PropagationProfile,
    t_ms: f64,
) -> Result<StalenessProbability> {
    if profile.w_base != spec.w || profile.n != spec.n {
        return Err(Error::config(format!(
            "profile built for n={} w={} cannot evaluate {spec}",
            profile.n, profile.w_base
        )));
    }
    let at_least = profile.at(t_ms)?;
    let n = spec.n as usize;
    let mut miss = 0.0;
    for c in spec.w as usize..=n {
        let next = if c == n { 0.0 } else { at_least[c + 1] };
        let mass = at_least[c] - next;
        if mass != 0.0 {
            miss += mass * to_f64(&exact_read_miss_ratio(spec.n, spec.r, c as u32));
        }
    }
    Ok(StalenessProbability::clamped(miss))
}

/// t-visibility bound raised to the `k`th power: the ⟨k,t⟩-staleness bound
/// when the last `k` writes committed at the same instant.
pub fn kt_staleness_miss(
    spec: QuorumSpec,
    profile: &PropagationProfile,
    t_ms: f64,
    tol: VersionTolerance,
) -> Result<StalenessProbability> {
    let p = t_visibility_miss(spec, profile, t_ms)?;
    Ok(StalenessProbability::clamped(p.value().powf(f64::from(tol.get()))))
}
