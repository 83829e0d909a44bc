//! Online Aalen additive hazard models of the first and second bid.
//!
//! For left-censored data the per-level "hazard" is `P(V = b_k | V <= b_k)`.
//! It is modelled as `λ_k = M_u^(k)' N_p^(k)`, with the same time-weighted
//! ALS recursions as the revenue model, except that an auction only enters
//! level `k` when `max(value or censor point, floor) <= b_k`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{AuctionEvent, CensorshipStatus, FloorGrid, Micros, Timestamp};
use crate::error::{Error, Result};
use crate::factors::{fold_side, EntityMap, FactorBlock, SolveScratch};
use crate::linalg;
use crate::params::BidHyper;

/// A bid as seen by one sub-model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BidObservation {
    Observed(Micros),
    /// The bid is only known to be below `at`.
    Censored {
        at: Micros,
    },
}

impl BidObservation {
    fn point(&self) -> Micros {
        match *self {
            BidObservation::Observed(v) => v,
            BidObservation::Censored { at } => at,
        }
    }
}

/// Per-level hazards and the CDF built from them.
///
/// `cdf[k] = exp(-Σ_{j>=k} λ_j)` estimates `P(V < b_k)`: the probability
/// that the bid falls in a bin strictly below level `k`. The mass of bin `k`
/// is `cdf[k + 1] - cdf[k]`, with `cdf[K] := 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidCdf {
    pub hazard: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl BidCdf {
    /// CDF from (unclamped) hazards; each is clamped to `[0, max_hazard]`.
    pub fn from_hazards(raw: &[f64], max_hazard: f64) -> Self {
        let hazard: Vec<f64> = raw
            .iter()
            .map(|&h| {
                if h.is_nan() {
                    0.0
                } else {
                    h.clamp(0.0, max_hazard)
                }
            })
            .collect();
        let mut cdf = vec![0.0; hazard.len()];
        let mut cumulative = 0.0;
        for k in (0..hazard.len()).rev() {
            cumulative += hazard[k];
            cdf[k] = (-cumulative).exp();
        }
        BidCdf { hazard, cdf }
    }

    /// CDF given directly as `P(V < b_k)`. Hazards are derived as
    /// `ln(cdf[k+1] / cdf[k])`.
    pub fn from_cdf(cdf: Vec<f64>) -> Result<Self> {
        if cdf.iter().any(|c| !(0.0..=1.0).contains(c)) || cdf.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig(
                "cdf must be nondecreasing within [0, 1]".into(),
            ));
        }
        let n = cdf.len();
        let hazard = (0..n)
            .map(|k| {
                let upper = if k + 1 < n { cdf[k + 1] } else { 1.0 };
                if cdf[k] > 0.0 {
                    (upper / cdf[k]).ln()
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        Ok(BidCdf { hazard, cdf })
    }

    /// All mass in bin `bin`.
    pub fn point_mass(levels: usize, bin: usize) -> Self {
        let cdf = (0..levels)
            .map(|k| if k <= bin { 0.0 } else { 1.0 })
            .collect();
        BidCdf::from_cdf(cdf).expect("valid point mass")
    }

    /// Probability mass per bin.
    pub fn from_pmf(pmf: &[f64]) -> Result<Self> {
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc: f64 = 0.0;
        for &p in pmf {
            cdf.push(acc.min(1.0));
            acc += p;
        }
        if (acc - 1.0).abs() > 1e-9 || pmf.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidConfig(
                "pmf must be non-negative and sum to 1".into(),
            ));
        }
        BidCdf::from_cdf(cdf)
    }

    pub fn levels(&self) -> usize {
        self.cdf.len()
    }

    /// `P(V < b_k)`, with `k == K` meaning 1.
    pub fn below(&self, k: usize) -> f64 {
        self.cdf.get(k).copied().unwrap_or(1.0)
    }

    /// Mass of bin `k`.
    pub fn mass(&self, k: usize) -> f64 {
        self.below(k + 1) - self.below(k)
    }
}

#[derive(Debug, Clone)]
pub struct AalenUndo {
    user_id: String,
    placement_id: String,
    user: Option<(FactorBlock, u64)>,
    placement: Option<(FactorBlock, u64)>,
    rng: ChaCha8Rng,
    exposures: Vec<u64>,
    clocks: (u64, u64),
}

/// One bid distribution (first or second bid).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AalenModel {
    levels: usize,
    hyper: BidHyper,
    users: EntityMap<FactorBlock>,
    placements: EntityMap<FactorBlock>,
    rng: ChaCha8Rng,
    /// Number of observations folded into each level.
    exposures: Vec<u64>,
}

impl PartialEq for AalenModel {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
            && self.hyper == other.hyper
            && self.users == other.users
            && self.placements == other.placements
            && self.rng == other.rng
            && self.exposures == other.exposures
    }
}

impl AalenModel {
    pub fn new(levels: usize, hyper: BidHyper, seed: u64) -> Result<Self> {
        hyper.validate()?;
        Ok(AalenModel {
            levels,
            hyper,
            users: EntityMap::default(),
            placements: EntityMap::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            exposures: vec![0; levels],
        })
    }

    pub fn with_capacity(mut self, users: Option<usize>, placements: Option<usize>) -> Self {
        self.users = EntityMap::with_capacity_bound(users);
        self.placements = EntityMap::with_capacity_bound(placements);
        self
    }

    pub fn hyper(&self) -> &BidHyper {
        &self.hyper
    }

    pub fn exposures(&self) -> &[u64] {
        &self.exposures
    }

    pub fn users(&self) -> &EntityMap<FactorBlock> {
        &self.users
    }

    pub fn placements(&self) -> &EntityMap<FactorBlock> {
        &self.placements
    }

    /// Lowest level the observation belongs to; it contributes to every
    /// level at or above.
    pub fn entry_level(&self, grid: &FloorGrid, obs: BidObservation) -> usize {
        match obs {
            BidObservation::Observed(v) => grid.bin(v),
            BidObservation::Censored { at } => grid.ceil_bin(at),
        }
    }

    /// Online update for one observation.
    pub fn aalen_update(
        &mut self,
        grid: &FloorGrid,
        user: &str,
        placement: &str,
        ts: Timestamp,
        obs: BidObservation,
    ) -> Result<()> {
        let decays = self.validate_update(grid, user, placement, ts, obs)?;
        self.apply_update(grid, user, placement, ts, obs, &decays);
        Ok(())
    }

    fn validate_update(
        &self,
        grid: &FloorGrid,
        user: &str,
        placement: &str,
        ts: Timestamp,
        obs: BidObservation,
    ) -> Result<Vec<(f64, f64)>> {
        if grid.len() != self.levels {
            return Err(Error::Dimension {
                what: "grid levels",
                expected: self.levels,
                got: grid.len(),
            });
        }
        if obs.point().0 < 0 {
            return Err(Error::InvalidEvent(
                "bid values must be non-negative".into(),
            ));
        }
        let first = self.entry_level(grid, obs);
        let h = &self.hyper;
        let mut decays = vec![(1.0, 1.0); self.levels];
        let ublock = self.users.get(user);
        let pblock = self.placements.get(placement);
        for (k, d) in decays.iter_mut().enumerate().skip(first) {
            if let Some(b) = ublock {
                d.0 = b.decay_factor(k, ts, h.forgetting.user, h.timestamp_policy, user)?;
            }
            if let Some(b) = pblock {
                d.1 =
                    b.decay_factor(k, ts, h.forgetting.placement, h.timestamp_policy, placement)?;
            }
        }
        Ok(decays)
    }

    fn apply_update(
        &mut self,
        grid: &FloorGrid,
        user: &str,
        placement: &str,
        ts: Timestamp,
        obs: BidObservation,
        decays: &[(f64, f64)],
    ) {
        let h = &self.hyper;
        let first = self.entry_level(grid, obs);
        let mut ublock = match self.users.take(user) {
            Some((b, _)) => b,
            None => FactorBlock::new(
                self.levels,
                &h.user_prior,
                h.init_noise_stddev,
                &mut self.rng,
            ),
        };
        let mut pblock = match self.placements.take(placement) {
            Some((b, _)) => b,
            None => FactorBlock::new(
                self.levels,
                &h.placement_prior,
                h.init_noise_stddev,
                &mut self.rng,
            ),
        };
        let l = h.latent_dim;
        let mut scratch = SolveScratch::new(l);
        let mut m = vec![0.0; l];
        let mut n = vec![0.0; l];
        for k in first..self.levels {
            let target = match obs {
                BidObservation::Observed(_) if k == first => 1.0,
                _ => 0.0,
            };
            let (du, dp) = decays[k];
            m.copy_from_slice(ublock.factors(k));
            n.copy_from_slice(pblock.factors(k));
            for _ in 0..h.iterations {
                let us = ublock.state(k);
                scratch.solve_side(&mut m, &h.user_prior, du, us.cov, us.obs, &n, target);
                let ps = pblock.state(k);
                scratch.solve_side(&mut n, &h.placement_prior, dp, ps.cov, ps.obs, &m, target);
            }
            fold_side(&mut ublock, k, du, &h.user_prior.mean, &n, target, ts);
            fold_side(&mut pblock, k, dp, &h.placement_prior.mean, &m, target, ts);
            ublock.factors_mut(k).copy_from_slice(&m);
            pblock.factors_mut(k).copy_from_slice(&n);
            self.exposures[k] += 1;
        }
        self.users.put(user, ublock);
        self.placements.put(placement, pblock);
    }

    /// Raw (unclamped) per-level hazards for a (user, placement) pair.
    pub fn raw_hazards(&self, user: &str, placement: &str) -> Vec<f64> {
        let ublock = self.users.get(user);
        let pblock = self.placements.get(placement);
        (0..self.levels)
            .map(|k| {
                let m = ublock.map_or(&self.hyper.user_prior.mean[..], |b| b.factors(k));
                let n = pblock.map_or(&self.hyper.placement_prior.mean[..], |b| b.factors(k));
                linalg::dot(m, n)
            })
            .collect()
    }

    /// Clamped hazards and CDF for a (user, placement) pair. Pure.
    pub fn estimate_cdf(&self, user: &str, placement: &str) -> BidCdf {
        BidCdf::from_hazards(&self.raw_hazards(user, placement), self.hyper.max_hazard)
    }

    pub fn evict_excess(&mut self) {
        self.users.evict_excess();
        self.placements.evict_excess();
    }

    pub fn snapshot(&self, user: &str, placement: &str) -> AalenUndo {
        AalenUndo {
            user_id: user.to_string(),
            placement_id: placement.to_string(),
            user: self.users.clone_entry(user),
            placement: self.placements.clone_entry(placement),
            rng: self.rng.clone(),
            exposures: self.exposures.clone(),
            clocks: (self.users.clock(), self.placements.clock()),
        }
    }

    pub fn restore(&mut self, undo: AalenUndo) {
        self.users.restore(&undo.user_id, undo.user);
        self.placements.restore(&undo.placement_id, undo.placement);
        self.users.set_clock(undo.clocks.0);
        self.placements.set_clock(undo.clocks.1);
        self.rng = undo.rng;
        self.exposures = undo.exposures;
    }
}

/// The first- and second-bid models. They never share state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidModelStore {
    pub first: AalenModel,
    pub second: AalenModel,
}

/// What each sub-model receives for one auction.
pub fn dispatch(status: &CensorshipStatus) -> (BidObservation, BidObservation) {
    match *status {
        CensorshipStatus::Uncensored { b1, b2 } => {
            (BidObservation::Observed(b1), BidObservation::Observed(b2))
        }
        CensorshipStatus::HalfCensored { b1, censor_point } => (
            BidObservation::Observed(b1),
            BidObservation::Censored { at: censor_point },
        ),
        CensorshipStatus::FullCensored { censor_point } => (
            BidObservation::Censored { at: censor_point },
            BidObservation::Censored { at: censor_point },
        ),
    }
}

impl BidModelStore {
    pub fn new(levels: usize, hyper: BidHyper, seed: u64) -> Result<Self> {
        Ok(BidModelStore {
            first: AalenModel::new(levels, hyper.clone(), seed.wrapping_add(1))?,
            second: AalenModel::new(levels, hyper, seed.wrapping_add(2))?,
        })
    }

    pub fn with_capacity(self, users: Option<usize>, placements: Option<usize>) -> Self {
        BidModelStore {
            first: self.first.with_capacity(users, placements),
            second: self.second.with_capacity(users, placements),
        }
    }

    /// Feeds one auction to both sub-models. Either both updates apply or
    /// neither does.
    pub fn update_from_auction(&mut self, grid: &FloorGrid, event: &AuctionEvent) -> Result<()> {
        let status = crate::domain::derive_censorship(event)?;
        self.update_from_status(
            grid,
            &event.user_id,
            &event.placement_id,
            event.timestamp,
            &status,
        )
    }

    pub fn update_from_status(
        &mut self,
        grid: &FloorGrid,
        user: &str,
        placement: &str,
        ts: Timestamp,
        status: &CensorshipStatus,
    ) -> Result<()> {
        let (first, second) = dispatch(status);
        let d1 = self
            .first
            .validate_update(grid, user, placement, ts, first)?;
        let d2 = self
            .second
            .validate_update(grid, user, placement, ts, second)?;
        self.first
            .apply_update(grid, user, placement, ts, first, &d1);
        self.second
            .apply_update(grid, user, placement, ts, second, &d2);
        Ok(())
    }

    pub fn evict_excess(&mut self) {
        self.first.evict_excess();
        self.second.evict_excess();
    }
}
