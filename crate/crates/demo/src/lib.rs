//! WebAssembly bindings for the page in `www/`. Every call returns JSON
//! text for the page to parse.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal};
use reserve_core::censorship::{
    expected_revenue_full_censored, expected_revenue_half_censored, simulate_revenue_vector,
};
use reserve_core::domain::Spacing;
use reserve_core::simulation::{
    experiment_grid, generate_stream, realized_revenue, Drift, StreamConfig,
};
use reserve_core::{
    derive_censorship, BidCdf, CensorshipStatus, Engine, EngineConfig, FloorGrid, HyperParams,
    Micros,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn parse_variant(name: &str) -> Result<reserve_core::Variant, String> {
    serde_json::from_value(serde_json::Value::String(name.to_uppercase()))
        .map_err(|_| format!("unknown variant {name}"))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo output serialises")
}

/// `P(V < x)` for a log-normal value.
fn lognormal_below(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    0.5 * libm::erfc(-(x.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
}

fn lognormal_cdf(grid: &FloorGrid, mu: f64, sigma: f64) -> Result<BidCdf, String> {
    if !(sigma > 0.0 && mu.is_finite()) {
        return Err("need a finite location and a positive scale".into());
    }
    BidCdf::from_cdf(
        grid.values()
            .iter()
            .map(|&v| lognormal_below(v, mu, sigma))
            .collect(),
    )
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct Reconstruction {
    pub levels: Vec<f64>,
    pub first_cdf: Vec<f64>,
    pub second_cdf: Vec<f64>,
    /// "full" when the auction was lost, "half" when only the first bid
    /// was seen, "none" when both were.
    pub censoring: &'static str,
    pub censor_level: usize,
    /// Revenue per level as the engine's training target.
    pub target: Vec<f64>,
}

pub fn reconstruction(
    mu1: f64,
    sigma1: f64,
    mu2: f64,
    sigma2: f64,
    floor: f64,
    b1: f64,
    b2: f64,
) -> Result<Reconstruction, String> {
    let grid = FloorGrid::with_zero_level(40, 0.05, 20.0, Spacing::Geometric)
        .map_err(|e| e.to_string())?;
    let first = lognormal_cdf(&grid, mu1, sigma1)?;
    let second = lognormal_cdf(&grid, mu2, sigma2)?;
    let floor = grid.level(grid.bin(Micros::from_units(floor.max(0.0))));
    let b1 = Micros::from_units(b1.max(0.0));
    let b2 = Micros::from_units(b2.max(0.0)).min(b1);
    let event = reserve_core::AuctionEvent::from_bids(0, "u", "p", floor, b1, b2);
    let status = derive_censorship(&event).map_err(|e| e.to_string())?;
    let a = grid.ceil_bin(floor);
    let (censoring, target) = match status {
        CensorshipStatus::Uncensored { b1, b2 } => ("none", simulate_revenue_vector(&grid, b1, b2)),
        CensorshipStatus::HalfCensored { b1, .. } => (
            "half",
            expected_revenue_half_censored(&grid, &second, b1, a),
        ),
        CensorshipStatus::FullCensored { .. } => (
            "full",
            expected_revenue_full_censored(&grid, &first, &second, a),
        ),
    };
    Ok(Reconstruction {
        levels: grid.values(),
        first_cdf: first.cdf,
        second_cdf: second.cdf,
        censoring,
        censor_level: a,
        target,
    })
}

/// Expected-revenue target for an auction with floor `floor` and true bids
/// `b1 >= b2`, with log-normal bid distributions for the unseen bids.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn reconstruct(
    mu1: f64,
    sigma1: f64,
    mu2: f64,
    sigma2: f64,
    floor: f64,
    b1: f64,
    b2: f64,
) -> Result<String, String> {
    reconstruction(mu1, sigma1, mu2, sigma2, floor, b1, b2).map(|r| to_json(&r))
}

#[derive(Serialize)]
pub struct Series {
    pub method: String,
    /// Running average revenue, one point per `every` auctions.
    pub running: Vec<f64>,
    pub average: f64,
    pub censored: f64,
}

#[derive(Serialize)]
pub struct Comparison {
    pub every: usize,
    pub series: Vec<Series>,
}

pub fn comparison(auctions: usize, seed: u64, drift: f64) -> Result<Comparison, String> {
    let n = auctions.clamp(100, 50_000);
    let stream = generate_stream(&StreamConfig {
        n_users: 500,
        n_placements: 10,
        n_auctions: n,
        drift: Drift::Sinusoidal {
            amplitude: drift,
            period_secs: 86_400.0,
        },
        seed,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let every = (n / 100).max(1);
    let mut series = Vec::new();
    let mut push = |method: String, revenue: Vec<f64>, censored: usize| {
        let mut total = 0.0;
        let mut running = Vec::new();
        for (i, r) in revenue.iter().enumerate() {
            total += r;
            if (i + 1) % every == 0 {
                running.push(total / (i + 1) as f64);
            }
        }
        series.push(Series {
            method,
            running,
            average: total / n as f64,
            censored: censored as f64 / n as f64,
        });
    };
    push(
        "NO_RES".into(),
        stream.iter().map(|a| a.b2.to_units()).collect(),
        0,
    );
    push(
        "ORACLE".into(),
        stream.iter().map(|a| a.b1.to_units()).collect(),
        0,
    );
    for variant in reserve_core::Variant::ALL {
        let config = EngineConfig::new(variant, experiment_grid(), HyperParams::default(), seed);
        let mut engine = Engine::new(config).map_err(|e| e.to_string())?;
        let mut revenue = Vec::with_capacity(n);
        let mut censored = 0;
        for a in &stream {
            let d = engine
                .choose_floor(&a.user, &a.placement, a.timestamp)
                .map_err(|e| e.to_string())?;
            revenue.push(realized_revenue(d.floor, a.b1, a.b2));
            let event = a.observe(d.floor);
            censored += usize::from(
                derive_censorship(&event)
                    .map_err(|e| e.to_string())?
                    .is_censored(),
            );
            engine.process_outcome(&event).map_err(|e| e.to_string())?;
        }
        push(format!("{variant:?}"), revenue, censored);
    }
    Ok(Comparison { every, series })
}

/// Runs every variant in closed loop on one synthetic stream, next to the
/// no-floor and oracle revenues.
#[wasm_bindgen]
pub fn compare(auctions: u32, seed: u32, drift: f64) -> Result<String, String> {
    comparison(auctions as usize, seed as u64, drift).map(|c| to_json(&c))
}

#[derive(Serialize)]
pub struct PlaygroundState {
    pub levels: Vec<f64>,
    pub profile: Vec<f64>,
    pub floor: f64,
    pub auctions: u64,
    pub censored: u64,
    pub revenue: f64,
    /// Learned first-bid CDF, for the variant that keeps bid models.
    pub first_cdf: Option<Vec<f64>>,
    /// The CDF the bids are actually drawn from.
    pub true_cdf: Vec<f64>,
}

/// One user on one placement, with bids drawn from a log-normal whose
/// parameters can change between calls.
#[wasm_bindgen]
pub struct Playground {
    engine: Engine,
    rng: ChaCha8Rng,
    ts: i64,
    revenue: f64,
    mu: f64,
    sigma: f64,
}

const USER: &str = "you";
const PLACEMENT: &str = "site";

#[wasm_bindgen]
impl Playground {
    #[wasm_bindgen(constructor)]
    pub fn new(variant: &str, seed: u32) -> Result<Playground, String> {
        let config = EngineConfig::new(
            parse_variant(variant)?,
            experiment_grid(),
            HyperParams::default(),
            seed as u64,
        );
        Ok(Playground {
            engine: Engine::new(config).map_err(|e| e.to_string())?,
            rng: ChaCha8Rng::seed_from_u64(seed as u64),
            ts: 0,
            revenue: 0.0,
            mu: 0.0,
            sigma: 0.5,
        })
    }

    /// Plays `n` auctions with first bids drawn from LogNormal(mu, sigma) and
    /// second bids a Beta(2, 4) fraction of the first.
    pub fn feed(&mut self, n: u32, mu: f64, sigma: f64) -> Result<String, String> {
        let value = LogNormal::new(mu, sigma).map_err(|e| e.to_string())?;
        let ratio = Beta::new(2.0, 4.0).expect("valid beta");
        self.mu = mu;
        self.sigma = sigma;
        for _ in 0..n {
            self.ts += 60_000;
            let b1 = Micros::from_units(value.sample(&mut self.rng));
            let b2 = Micros::from_units(b1.to_units() * ratio.sample(&mut self.rng)).min(b1);
            let d = self
                .engine
                .choose_floor(USER, PLACEMENT, self.ts)
                .map_err(|e| e.to_string())?;
            self.revenue += realized_revenue(d.floor, b1, b2);
            let event =
                reserve_core::AuctionEvent::from_bids(self.ts, USER, PLACEMENT, d.floor, b1, b2);
            self.engine
                .process_outcome(&event)
                .map_err(|e| e.to_string())?;
        }
        self.state()
    }

    pub fn state(&self) -> Result<String, String> {
        self.snapshot().map(|s| to_json(&s))
    }
}

impl Playground {
    pub fn snapshot(&self) -> Result<PlaygroundState, String> {
        let d = self
            .engine
            .choose_floor(USER, PLACEMENT, self.ts)
            .map_err(|e| e.to_string())?;
        let grid = self.engine.grid();
        let c = self.engine.counters();
        Ok(PlaygroundState {
            levels: grid.values(),
            profile: d.profile.expected_revenue,
            floor: d.floor.to_units(),
            auctions: c.events,
            censored: c.half_censored + c.full_censored,
            revenue: self.revenue,
            first_cdf: self
                .engine
                .bid_models()
                .map(|b| b.first.estimate_cdf(USER, PLACEMENT).cdf),
            true_cdf: grid
                .values()
                .iter()
                .map(|&v| lognormal_below(v, self.mu, self.sigma))
                .collect(),
        })
    }
}
