//! Probabilistically bounded staleness (PBS) for Dynamo-style partial quorums.
//!
//! The crate has two halves:
//!
//! * [`staleness`] evaluates the exact closed forms: quorum non-intersection,
//!   k-staleness, monotonic reads, load bounds, t-visibility and
//!   ⟨k,t⟩-staleness over a [`PropagationProfile`](staleness::PropagationProfile).
//! * [`wars`] runs seeded Monte Carlo trials of the WARS model (write request,
//!   write ack, read request, read response delays) to estimate t-visibility
//!   and operation latency for real latency distributions.
//!
//! [`analysis`] builds sweeps, trade-off tables and SLA searches on top of the
//! simulator, and [`export`] serializes them as CSV or JSON.
//!
//! All latencies are milliseconds. All probabilities are decimals in `[0, 1]`.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod export;
pub mod latency;
pub mod rng;
pub mod staleness;
pub mod wars;

pub use error::{Error, Result};
pub use exec::{Execution, RunPlan};
pub use latency::{Distribution, Preset, WarsDistributions};
pub use rng::RandomSource;
pub use staleness::{PropagationProfile, QuorumSpec, StalenessProbability, VersionTolerance};
pub use wars::{Estimate, TVisibility, Topology, WarsModel};
