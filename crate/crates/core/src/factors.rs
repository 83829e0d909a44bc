//! Per-entity latent factor blocks and the entity map shared by the revenue
//! and bid models.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{elapsed_secs, Timestamp};
use crate::error::{Error, Result};
use crate::linalg;
use crate::params::{FactorPrior, TimestampPolicy};

/// K levels of (factors, cov, obs, last_update) for one user or placement,
/// stored contiguously so an auction touches one block per entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorBlock {
    dim: usize,
    factors: Vec<f64>,
    cov: Vec<f64>,
    obs: Vec<f64>,
    last_update: Vec<Option<Timestamp>>,
}

/// Borrowed view of one level of a [`FactorBlock`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorState<'a> {
    pub factors: &'a [f64],
    pub cov: &'a [f64],
    pub obs: &'a [f64],
    pub last_update: Option<Timestamp>,
}

impl FactorBlock {
    /// Fresh block: factors at the prior mean plus Gaussian noise, empty
    /// accumulators.
    pub fn new<R: Rng>(levels: usize, prior: &FactorPrior, noise_stddev: f64, rng: &mut R) -> Self {
        let dim = prior.dim();
        let mut factors = Vec::with_capacity(levels * dim);
        for _ in 0..levels {
            factors.extend_from_slice(&prior.mean);
        }
        if noise_stddev > 0.0 {
            let normal = Normal::new(0.0, noise_stddev).expect("finite stddev");
            for v in factors.iter_mut() {
                *v += normal.sample(rng);
            }
        }
        FactorBlock {
            dim,
            factors,
            cov: vec![0.0; levels * dim * dim],
            obs: vec![0.0; levels * dim],
            last_update: vec![None; levels],
        }
    }

    pub fn levels(&self) -> usize {
        self.last_update.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, k: usize) -> FactorState<'_> {
        let (l, l2) = (self.dim, self.dim * self.dim);
        FactorState {
            factors: &self.factors[k * l..(k + 1) * l],
            cov: &self.cov[k * l2..(k + 1) * l2],
            obs: &self.obs[k * l..(k + 1) * l],
            last_update: self.last_update[k],
        }
    }

    pub fn factors(&self, k: usize) -> &[f64] {
        &self.factors[k * self.dim..(k + 1) * self.dim]
    }

    pub(crate) fn factors_mut(&mut self, k: usize) -> &mut [f64] {
        let l = self.dim;
        &mut self.factors[k * l..(k + 1) * l]
    }

    pub(crate) fn cov_mut(&mut self, k: usize) -> &mut [f64] {
        let l2 = self.dim * self.dim;
        &mut self.cov[k * l2..(k + 1) * l2]
    }

    pub(crate) fn obs_mut(&mut self, k: usize) -> &mut [f64] {
        let l = self.dim;
        &mut self.obs[k * l..(k + 1) * l]
    }

    pub fn last_update(&self, k: usize) -> Option<Timestamp> {
        self.last_update[k]
    }

    /// Latest timestamp over all levels.
    pub fn latest(&self) -> Option<Timestamp> {
        self.last_update.iter().flatten().copied().max()
    }

    pub(crate) fn set_last_update(&mut self, k: usize, ts: Timestamp) {
        self.last_update[k] = Some(ts);
    }

    /// Decay factor `γ^Δt` for level `k` at `ts`, checking ordering.
    pub(crate) fn decay_factor(
        &self,
        k: usize,
        ts: Timestamp,
        gamma: f64,
        policy: TimestampPolicy,
        entity: &str,
    ) -> Result<f64> {
        decay_factor(self.last_update[k], ts, gamma, policy, entity)
    }

    /// Multiplies level `k`'s accumulators by `factor`.
    pub(crate) fn scale_level(&mut self, k: usize, factor: f64) {
        if factor != 1.0 {
            self.cov_mut(k).iter_mut().for_each(|v| *v *= factor);
            self.obs_mut(k).iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Decays every level to `ts` without adding observations. Levels never
    /// updated keep their empty accumulators and no timestamp.
    pub fn decay_to(&mut self, ts: Timestamp, gamma: f64) -> Result<()> {
        for k in 0..self.levels() {
            if let Some(last) = self.last_update[k] {
                if ts < last {
                    return Err(Error::OutOfOrder {
                        entity: "decay".into(),
                        timestamp: ts,
                        last_update: last,
                    });
                }
            }
        }
        for k in 0..self.levels() {
            if let Some(last) = self.last_update[k] {
                let f = gamma_pow(gamma, elapsed_secs(last, ts));
                self.scale_level(k, f);
                self.last_update[k] = Some(ts);
            }
        }
        Ok(())
    }
}

pub(crate) fn decay_factor(
    last: Option<Timestamp>,
    ts: Timestamp,
    gamma: f64,
    policy: TimestampPolicy,
    entity: &str,
) -> Result<f64> {
    match last {
        None => Ok(1.0),
        Some(last) if ts >= last => Ok(gamma_pow(gamma, elapsed_secs(last, ts))),
        Some(last) => match policy {
            TimestampPolicy::Clamp => Ok(1.0),
            TimestampPolicy::Reject => Err(Error::OutOfOrder {
                entity: entity.to_string(),
                timestamp: ts,
                last_update: last,
            }),
        },
    }
}

#[inline]
pub fn gamma_pow(gamma: f64, dt_secs: f64) -> f64 {
    if gamma == 1.0 || dt_secs == 0.0 {
        1.0
    } else {
        (dt_secs * gamma.ln()).exp()
    }
}

/// Scratch buffers for one L-dimensional regularised solve.
#[derive(Debug, Clone)]
pub(crate) struct SolveScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl SolveScratch {
    pub fn new(dim: usize) -> Self {
        SolveScratch {
            a: vec![0.0; dim * dim],
            b: vec![0.0; dim],
        }
    }

    /// `out = mean + (g·cov + v v' + P)^{-1} (g·obs + (target - mean'v) v)`:
    /// the closed-form minimiser for one side given the other side `v`.
    pub fn solve_side(
        &mut self,
        out: &mut [f64],
        prior: &FactorPrior,
        decay: f64,
        cov: &[f64],
        obs: &[f64],
        other: &[f64],
        target: f64,
    ) {
        let n = other.len();
        let resid = target - linalg::dot(&prior.mean, other);
        for i in 0..n {
            for j in 0..n {
                self.a[i * n + j] =
                    decay * cov[i * n + j] + other[i] * other[j] + prior.precision[i * n + j];
            }
            self.b[i] = decay * obs[i] + resid * other[i];
        }
        let ok = linalg::spd_solve_in_place(&mut self.a, &mut self.b, n);
        debug_assert!(ok, "regularised normal equations must be SPD");
        if ok {
            for i in 0..n {
                out[i] = prior.mean[i] + self.b[i];
            }
        }
    }
}

/// Folds one observation into a level's accumulators after decay:
/// `cov <- g·cov + v v'`, `obs <- g·obs + (target - mean'v) v`.
pub(crate) fn fold_side(
    block: &mut FactorBlock,
    k: usize,
    decay: f64,
    prior_mean: &[f64],
    other: &[f64],
    target: f64,
    ts: Timestamp,
) {
    block.scale_level(k, decay);
    linalg::add_outer(block.cov_mut(k), other, 1.0);
    let resid = target - linalg::dot(prior_mean, other);
    for (o, v) in block.obs_mut(k).iter_mut().zip(other) {
        *o += resid * v;
    }
    block.set_last_update(k, ts);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry<B> {
    block: B,
    touched: u64,
}

/// Map from entity id to block with optional least-recently-updated
/// eviction. Iteration order is the id order, so serialised snapshots are
/// deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMap<B> {
    entries: BTreeMap<String, Entry<B>>,
    recency: BTreeMap<u64, String>,
    clock: u64,
    capacity: Option<usize>,
}

impl<B> Default for EntityMap<B> {
    fn default() -> Self {
        EntityMap {
            entries: BTreeMap::new(),
            recency: BTreeMap::new(),
            clock: 0,
            capacity: None,
        }
    }
}

impl<B> EntityMap<B> {
    pub fn with_capacity_bound(capacity: Option<usize>) -> Self {
        EntityMap {
            capacity,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&B> {
        self.entries.get(id).map(|e| &e.block)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &B)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), &e.block))
    }

    pub(crate) fn clone_entry(&self, id: &str) -> Option<(B, u64)>
    where
        B: Clone,
    {
        self.entries.get(id).map(|e| (e.block.clone(), e.touched))
    }

    /// Removes and returns an entry, used to restore pre-update snapshots.
    pub(crate) fn take(&mut self, id: &str) -> Option<(B, u64)> {
        let e = self.entries.remove(id)?;
        self.recency.remove(&e.touched);
        Some((e.block, e.touched))
    }

    pub(crate) fn restore(&mut self, id: &str, saved: Option<(B, u64)>) {
        if let Some(e) = self.entries.remove(id) {
            self.recency.remove(&e.touched);
        }
        if let Some((block, touched)) = saved {
            self.recency.insert(touched, id.to_string());
            self.entries
                .insert(id.to_string(), Entry { block, touched });
        }
    }

    /// Puts a block back (or inserts a new one) and marks it most recently
    /// updated.
    pub(crate) fn put(&mut self, id: &str, block: B) {
        if let Some(e) = self.entries.remove(id) {
            self.recency.remove(&e.touched);
        }
        self.clock += 1;
        self.recency.insert(self.clock, id.to_string());
        self.entries.insert(
            id.to_string(),
            Entry {
                block,
                touched: self.clock,
            },
        );
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub(crate) fn set_clock(&mut self, clock: u64) {
        self.clock = clock;
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    /// Drops least-recently-updated entries above capacity. Returns the
    /// evicted ids.
    pub fn evict_excess(&mut self) -> Vec<String> {
        let mut evicted = Vec::new();
        if let Some(cap) = self.capacity {
            while self.entries.len() > cap {
                let (&touched, _) = self.recency.iter().next().expect("recency tracks entries");
                let id = self.recency.remove(&touched).expect("present");
                self.entries.remove(&id);
                evicted.push(id);
            }
        }
        evicted
    }

    pub fn remove(&mut self, id: &str) -> Option<B> {
        self.take(id).map(|(b, _)| b)
    }
}
