use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Topology, WarsModel};
use crate::rng::RandomSource;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub stale: bool,
    /// `w_t`: time from write issue until the `w`-th acknowledgement.
    pub write_commit_ms: f64,
    /// Time from read issue until the `r`-th response.
    pub read_return_ms: f64,
    /// How many of the first `r` responders already held the write.
    pub fresh_replica_count_at_read: u32,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Draw {
    /// The read is stale iff `t < horizon`.
    pub horizon: f64,
    pub write_ms: f64,
    pub read_ms: f64,
}

/// Reusable per-shard scratch space for drawing trials of one model.
pub(crate) struct TrialEngine<'m> {
    model: &'m WarsModel,
    w: Vec<f64>,
    a: Vec<f64>,
    r: Vec<f64>,
    s: Vec<f64>,
    acks: Vec<f64>,
    order: Vec<usize>,
    commit: f64,
}

impl<'m> TrialEngine<'m> {
    pub fn new(model: &'m WarsModel) -> Self {
        let n = model.spec().n() as usize;
        TrialEngine {
            model,
            w: vec![0.0; n],
            a: vec![0.0; n],
            r: vec![0.0; n],
            s: vec![0.0; n],
            acks: vec![0.0; n],
            order: (0..n).collect(),
            commit: 0.0,
        }
    }

    pub fn draw(&mut self, rng: &mut RandomSource) -> Draw {
        let spec = self.model.spec();
        let n = spec.n() as usize;
        let dists = self.model.distributions();

        let (wan_delay, write_dc, read_dc) = match self.model.topology() {
            Topology::Uniform => (0.0, 0, 0),
            Topology::Wan { remote_extra_ms } => {
                (remote_extra_ms, rng.random_range(0..n), rng.random_range(0..n))
            }
        };

        for i in 0..n {
            self.w[i] = dists.w.sample(rng);
            self.a[i] = dists.a.sample(rng);
            self.r[i] = dists.r.sample(rng);
            self.s[i] = dists.s.sample(rng);
        }
        if wan_delay > 0.0 {
            for i in 0..n {
                if i != write_dc {
                    self.w[i] += wan_delay;
                    self.a[i] += wan_delay;
                }
                if i != read_dc {
                    self.r[i] += wan_delay;
                    self.s[i] += wan_delay;
                }
            }
        }

        for i in 0..n {
            self.acks[i] = self.w[i] + self.a[i];
        }
        let w_idx = spec.w() as usize - 1;
        self.acks.select_nth_unstable_by(w_idx, f64::total_cmp);
        self.commit = self.acks[w_idx];

        // Responses in arrival order; equal arrival times are shuffled so no
        // replica index is favoured.
        let (r_del, s_del) = (&self.r, &self.s);
        let key = |i: usize| r_del[i] + s_del[i];
        for (slot, i) in self.order.iter_mut().zip(0..n) {
            *slot = i;
        }
        self.order.sort_by(|&x, &y| key(x).total_cmp(&key(y)));
        let mut start = 0;
        while start < n {
            let k = key(self.order[start]);
            let mut end = start + 1;
            while end < n && key(self.order[end]) == k {
                end += 1;
            }
            if end - start > 1 {
                self.order[start..end].shuffle(rng);
            }
            start = end;
        }

        let quorum = &self.order[..spec.r() as usize];
        let horizon = quorum
            .iter()
            .map(|&i| self.w[i] - self.commit - self.r[i])
            .fold(f64::INFINITY, f64::min);
        Draw {
            horizon,
            write_ms: self.commit,
            read_ms: key(quorum[quorum.len() - 1]),
        }
    }

    pub fn outcome(&mut self, t_ms: f64, rng: &mut RandomSource) -> TrialOutcome {
        let draw = self.draw(rng);
        let r = self.model.spec().r() as usize;
        // fresh iff W[i] ≤ w_t + t + R[i]
        let fresh = self.order[..r]
            .iter()
            .filter(|&&i| t_ms >= self.w[i] - self.commit - self.r[i])
            .count() as u32;
        TrialOutcome {
            stale: t_ms < draw.horizon,
            write_commit_ms: draw.write_ms,
            read_return_ms: draw.read_ms,
            fresh_replica_count_at_read: fresh,
        }
    }

    /// Sorted `W[i] - w_t` for the last drawn trial: when each replica
    /// received the write, relative to commit.
    pub fn arrivals_after_commit(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.w.iter().map(|w| w - self.commit));
        out.sort_by(f64::total_cmp);
    }
}
