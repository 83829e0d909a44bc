//! Per-auction latency of choosing a floor and learning from the outcome.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::censorship::Variant;
use crate::domain::{AuctionEvent, FloorGrid, Micros, Spacing};
use crate::engine::{Engine, EngineConfig};
use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::simulation::{generate_stream, LatencySummary, StreamConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub levels: usize,
    pub latent_dim: usize,
    pub variant: Variant,
    pub users: usize,
    pub placements: usize,
    /// Auctions processed before timing starts.
    pub warmup: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            levels: 100,
            latent_dim: 2,
            variant: Variant::M1,
            users: 2_000,
            placements: 50,
            warmup: 2_000,
            iterations: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLatency {
    pub choose_floor: LatencySummary,
    pub process_outcome: LatencySummary,
    pub total: LatencySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    /// Every auction lost at the lowest positive floor: both bids censored,
    /// every level above enters both bid models, and the expected revenue
    /// is reconstructed from the bid distributions.
    pub censored: PathLatency,
    /// Every auction won with no floor: both bids observed.
    pub uncensored: PathLatency,
}

#[derive(Clone, Copy)]
enum Path {
    Censored,
    Uncensored,
}

fn run_path(config: &BenchConfig, path: Path) -> Result<PathLatency> {
    let grid = FloorGrid::with_zero_level(config.levels, 0.01, 50.0, Spacing::Geometric)?;
    let mut hyper = HyperParams::default();
    hyper.revenue = crate::params::RevenueHyper::bias_encoded(config.latent_dim, 10.0, 1e-2);
    hyper.bid = crate::params::BidHyper::bias_encoded(config.latent_dim, 10.0, 1e-2);
    let lowest = grid.level(1);
    let mut engine = Engine::new(EngineConfig::new(config.variant, grid, hyper, config.seed))?;
    let stream = generate_stream(&StreamConfig {
        n_users: config.users,
        n_placements: config.placements,
        n_auctions: config.warmup + config.iterations,
        flash_fraction: 0.0,
        seed: config.seed,
        ..Default::default()
    })?;
    let mut choose = Vec::with_capacity(config.iterations);
    let mut process = Vec::with_capacity(config.iterations);
    let mut total = Vec::with_capacity(config.iterations);
    for (i, a) in stream.iter().enumerate() {
        let t0 = Instant::now();
        let decision = engine.choose_floor(&a.user, &a.placement, a.timestamp)?;
        let t1 = Instant::now();
        let event = match path {
            Path::Censored => AuctionEvent::from_bids(
                a.timestamp,
                a.user.as_str(),
                a.placement.as_str(),
                lowest,
                Micros(0),
                Micros(0),
            ),
            Path::Uncensored => a.observe(Micros::ZERO),
        };
        engine.process_outcome(&event)?;
        let t2 = Instant::now();
        std::hint::black_box(&decision);
        if i >= config.warmup {
            choose.push((t1 - t0).as_nanos() as u64);
            process.push((t2 - t1).as_nanos() as u64);
            total.push((t2 - t0).as_nanos() as u64);
        }
    }
    Ok(PathLatency {
        choose_floor: LatencySummary::from_nanos(choose),
        process_outcome: LatencySummary::from_nanos(process),
        total: LatencySummary::from_nanos(total),
    })
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.levels < 2
        || config.latent_dim < 2
        || config.iterations == 0
        || config.users == 0
        || config.placements == 0
    {
        return Err(Error::InvalidConfig(
            "bench needs >= 2 levels, latent dim >= 2, and at least one iteration, user and placement".into(),
        ));
    }
    Ok(BenchReport {
        config: config.clone(),
        censored: run_path(config, Path::Censored)?,
        uncensored: run_path(config, Path::Uncensored)?,
    })
}
