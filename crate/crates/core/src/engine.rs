//! The online floor engine: choose a floor, observe the auction, learn.

use serde::{Deserialize, Serialize};

use crate::bid::BidModelStore;
use crate::censorship::{build_training_target, Variant};
use crate::domain::{
    derive_censorship, AuctionEvent, CensorshipStatus, FloorGrid, Micros, Timestamp,
};
use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::revenue::{argmax_lowest, RevenueModel, RevenueProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Greedy,
    /// Adds `alpha` times the per-level uncertainty before taking the argmax.
    LinUcb {
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub variant: Variant,
    pub selection: Selection,
    pub grid: FloorGrid,
    pub hyper: HyperParams,
    pub seed: u64,
    /// Maximum number of users and of placements kept in memory.
    #[serde(default)]
    pub capacity: Option<usize>,
}

impl EngineConfig {
    /// Default settings for a variant. `M4` selects with Lin-UCB, `alpha = 1`.
    pub fn new(variant: Variant, grid: FloorGrid, hyper: HyperParams, seed: u64) -> Self {
        let selection = match variant {
            Variant::M4 => Selection::LinUcb { alpha: 1.0 },
            _ => Selection::Greedy,
        };
        EngineConfig {
            variant,
            selection,
            grid,
            hyper,
            seed,
            capacity: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if let Selection::LinUcb { alpha } = self.selection {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "ucb alpha must be >= 0, got {alpha}"
                )));
            }
        }
        if self.capacity == Some(0) {
            return Err(Error::InvalidConfig("capacity must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub level: usize,
    pub floor: Micros,
    pub profile: RevenueProfile,
    /// The values the argmax ran over: the profile, plus the exploration
    /// bonus under Lin-UCB.
    pub scores: Vec<f64>,
}

impl Decision {
    /// Predicted revenue at the chosen level, without any exploration bonus.
    pub fn expected_revenue(&self) -> f64 {
        self.profile.expected_revenue[self.level]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Processed {
    Updated,
    /// The variant drops this auction without touching any state.
    Skipped,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub events: u64,
    pub uncensored: u64,
    pub half_censored: u64,
    pub full_censored: u64,
    pub skipped: u64,
}

impl Counters {
    fn record(&mut self, status: &CensorshipStatus) {
        self.events += 1;
        match status {
            CensorshipStatus::Uncensored { .. } => self.uncensored += 1,
            CensorshipStatus::HalfCensored { .. } => self.half_censored += 1,
            CensorshipStatus::FullCensored { .. } => self.full_censored += 1,
        }
    }

    pub fn censored_rate(&self) -> f64 {
        if self.events == 0 {
            0.0
        } else {
            (self.half_censored + self.full_censored) as f64 / self.events as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Engine {
    config: EngineConfig,
    revenue: RevenueModel,
    bids: Option<BidModelStore>,
    counters: Counters,
    #[cfg(test)]
    #[serde(skip)]
    fail_revenue_update: bool,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let k = config.grid.len();
        let revenue = RevenueModel::new(k, config.hyper.revenue.clone(), config.seed)?
            .with_capacity(config.capacity, config.capacity);
        let bids = if config.variant.uses_bid_models() {
            Some(
                BidModelStore::new(k, config.hyper.bid.clone(), config.seed)?
                    .with_capacity(config.capacity, config.capacity),
            )
        } else {
            None
        };
        Ok(Engine {
            config,
            revenue,
            bids,
            counters: Counters::default(),
            #[cfg(test)]
            fail_revenue_update: false,
        })
    }

    /// Engine with a pre-fitted revenue model, e.g. from an offline warm start.
    pub fn with_revenue_model(config: EngineConfig, revenue: RevenueModel) -> Result<Self> {
        let mut engine = Engine::new(config)?;
        if revenue.levels() != engine.config.grid.len() {
            return Err(Error::Dimension {
                what: "revenue model levels",
                expected: engine.config.grid.len(),
                got: revenue.levels(),
            });
        }
        engine.revenue = revenue.with_capacity(engine.config.capacity, engine.config.capacity);
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn grid(&self) -> &FloorGrid {
        &self.config.grid
    }

    pub fn revenue_model(&self) -> &RevenueModel {
        &self.revenue
    }

    pub fn bid_models(&self) -> Option<&BidModelStore> {
        self.bids.as_ref()
    }

    pub(crate) fn bid_models_mut(&mut self) -> Option<&mut BidModelStore> {
        self.bids.as_mut()
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Latest timestamp at which any stored user or placement was updated.
    pub fn last_update(&self) -> Option<Timestamp> {
        let r = &self.revenue;
        r.users()
            .iter()
            .chain(r.placements().iter())
            .filter_map(|(_, b)| b.latest())
            .max()
    }

    /// Picks the floor for an auction. Does not change any state.
    pub fn choose_floor(&self, user: &str, placement: &str, ts: Timestamp) -> Result<Decision> {
        let profile = self.revenue.predict_profile(user, placement, None)?;
        let scores = match self.config.selection {
            Selection::Greedy => profile.expected_revenue.clone(),
            Selection::LinUcb { alpha } => {
                let bonus = self.revenue.uncertainty(user, placement, ts);
                profile
                    .expected_revenue
                    .iter()
                    .zip(&bonus)
                    .map(|(r, u)| r + alpha * u)
                    .collect()
            }
        };
        let level = argmax_lowest(&scores);
        Ok(Decision {
            level,
            floor: self.config.grid.level(level),
            profile,
            scores,
        })
    }

    /// Learns from one auction outcome. On error no state changes.
    pub fn process_outcome(&mut self, event: &AuctionEvent) -> Result<Processed> {
        let status = derive_censorship(event)?;
        self.process_status(
            &event.user_id,
            &event.placement_id,
            event.timestamp,
            &status,
        )
    }

    /// Learns from an already classified outcome. Passing
    /// [`CensorshipStatus::Uncensored`] with the true bids feeds the engine
    /// complete information.
    pub fn process_status(
        &mut self,
        user: &str,
        placement: &str,
        ts: Timestamp,
        status: &CensorshipStatus,
    ) -> Result<Processed> {
        let grid = &self.config.grid;
        let variant = self.config.variant;
        let undo = match &mut self.bids {
            Some(store) => {
                let undo = (
                    store.first.snapshot(user, placement),
                    store.second.snapshot(user, placement),
                );
                store.update_from_status(grid, user, placement, ts, status)?;
                Some(undo)
            }
            None => None,
        };
        let cdfs = self.bids.as_ref().map(|s| {
            (
                s.first.estimate_cdf(user, placement),
                s.second.estimate_cdf(user, placement),
            )
        });
        let target =
            build_training_target(grid, status, variant, cdfs.as_ref().map(|(a, b)| (a, b)));
        let Some(target) = target else {
            self.counters.record(status);
            self.counters.skipped += 1;
            return Ok(Processed::Skipped);
        };
        if let Err(e) = self.update_revenue(user, placement, ts, &target.values, &target.active) {
            if let (Some(store), Some((first, second))) = (&mut self.bids, undo) {
                store.first.restore(first);
                store.second.restore(second);
            }
            return Err(e);
        }
        self.revenue.evict_excess();
        if let Some(store) = &mut self.bids {
            store.evict_excess();
        }
        self.counters.record(status);
        Ok(Processed::Updated)
    }

    fn update_revenue(
        &mut self,
        user: &str,
        placement: &str,
        ts: Timestamp,
        values: &[f64],
        active: &[bool],
    ) -> Result<()> {
        #[cfg(test)]
        if self.fail_revenue_update {
            return Err(Error::InvalidEvent("injected failure".into()));
        }
        self.revenue
            .update_levels(user, placement, ts, values, active, None)
    }
}
