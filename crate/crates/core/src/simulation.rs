//! Synthetic auction streams with known bids, baseline strategies and the
//! train/test experiment harness.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

use crate::batch::{batch_fit, TrainingEvent};
use crate::censorship::{simulate_revenue_vector, Variant};
use crate::domain::{
    derive_censorship, AuctionEvent, CensorshipStatus, FloorGrid, Micros, Spacing, Timestamp,
};
use crate::engine::{Engine, EngineConfig};
use crate::error::{Error, Result};
use crate::params::{FactorPrior, Forgetting, HyperParams};
use crate::revenue::argmax_lowest;

/// Time modulation of the log-scale location of the first bid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    None,
    Sinusoidal {
        amplitude: f64,
        period_secs: f64,
    },
    /// `(start fraction of the stream, shift)` pairs; each shift holds until
    /// the next start.
    Piecewise {
        steps: Vec<(f64, f64)>,
    },
}

impl Drift {
    fn shift(&self, secs: f64, fraction: f64) -> f64 {
        match self {
            Drift::None => 0.0,
            Drift::Sinusoidal {
                amplitude,
                period_secs,
            } => amplitude * (2.0 * std::f64::consts::PI * secs / period_secs).sin(),
            Drift::Piecewise { steps } => steps
                .iter()
                .take_while(|(start, _)| *start <= fraction)
                .last()
                .map_or(0.0, |s| s.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StreamConfig {
    pub n_users: usize,
    pub n_placements: usize,
    pub n_auctions: usize,
    pub duration_secs: f64,
    /// Log-normal location and scale of the first bid, in currency units.
    pub location: f64,
    pub scale: f64,
    pub user_offset_sd: f64,
    pub placement_offset_sd: f64,
    /// `b2 = b1 * Beta(ratio_alpha, ratio_beta)`.
    pub ratio_alpha: f64,
    pub ratio_beta: f64,
    pub drift: Drift,
    pub user_zipf: f64,
    pub placement_zipf: f64,
    /// Share of auctions that come from a one-shot user.
    pub flash_fraction: f64,
    pub seed: u64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            n_users: 20_000,
            n_placements: 200,
            n_auctions: 200_000,
            duration_secs: 7.0 * 86_400.0,
            location: 0.0,
            scale: 0.3,
            user_offset_sd: 1.0,
            placement_offset_sd: 0.4,
            ratio_alpha: 2.0,
            ratio_beta: 4.0,
            drift: Drift::Sinusoidal {
                amplitude: 0.3,
                period_secs: 86_400.0,
            },
            user_zipf: 1.0,
            placement_zipf: 0.8,
            flash_fraction: 0.2,
            seed: 0,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("stream: {m}")));
        if self.n_users == 0 || self.n_placements == 0 {
            return bad("needs at least one user and one placement");
        }
        if !(self.duration_secs >= 0.0) {
            return bad("duration must be >= 0");
        }
        if !(self.scale >= 0.0 && self.user_offset_sd >= 0.0 && self.placement_offset_sd >= 0.0) {
            return bad("scales must be >= 0");
        }
        if !(self.ratio_alpha > 0.0 && self.ratio_beta > 0.0) {
            return bad("ratio parameters must be > 0");
        }
        if !(self.user_zipf >= 0.0 && self.placement_zipf >= 0.0) {
            return bad("zipf exponents must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.flash_fraction) {
            return bad("flash fraction must be in [0, 1]");
        }
        if let Drift::Sinusoidal { period_secs, .. } = self.drift {
            if !(period_secs > 0.0) {
                return bad("drift period must be > 0");
            }
        }
        Ok(())
    }
}

/// One auction with its true bids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueAuction {
    pub timestamp: Timestamp,
    pub user: String,
    pub placement: String,
    pub b1: Micros,
    pub b2: Micros,
}

impl TrueAuction {
    /// The observable event under `floor`.
    pub fn observe(&self, floor: Micros) -> AuctionEvent {
        AuctionEvent::from_bids(
            self.timestamp,
            self.user.clone(),
            self.placement.clone(),
            floor,
            self.b1,
            self.b2,
        )
    }

    pub fn uncensored(&self) -> CensorshipStatus {
        CensorshipStatus::Uncensored {
            b1: self.b1,
            b2: self.b2,
        }
    }
}

/// Publisher revenue under `floor`: `max(floor, b2)` if the floor does not
/// exceed `b1`, else nothing.
pub fn realized_revenue(floor: Micros, b1: Micros, b2: Micros) -> f64 {
    if floor <= b1 {
        floor.max(b2).to_units()
    } else {
        0.0
    }
}

pub fn generate_stream(config: &StreamConfig) -> Result<Vec<TrueAuction>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = |sd: f64| Normal::new(0.0, sd).expect("sd validated");
    let user_offsets: Vec<f64> = {
        let d = normal(config.user_offset_sd);
        (0..config.n_users).map(|_| d.sample(&mut rng)).collect()
    };
    let placement_offsets: Vec<f64> = {
        let d = normal(config.placement_offset_sd);
        (0..config.n_placements)
            .map(|_| d.sample(&mut rng))
            .collect()
    };
    let user_pick = Zipf::new(config.n_users as f64, config.user_zipf).expect("zipf validated");
    let placement_pick =
        Zipf::new(config.n_placements as f64, config.placement_zipf).expect("zipf validated");
    let noise = normal(config.scale);
    let flash_offset = normal(config.user_offset_sd);
    let ratio = Beta::new(config.ratio_alpha, config.ratio_beta).expect("beta validated");
    let n = config.n_auctions;
    let duration_ms = config.duration_secs * 1000.0;
    let mut flash = 0usize;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let fraction = if n > 1 {
            i as f64 / (n - 1) as f64
        } else {
            0.0
        };
        let timestamp = (fraction * duration_ms).round() as Timestamp;
        let (user, user_offset) = if rng.random_bool(config.flash_fraction) {
            flash += 1;
            (format!("f{flash}"), flash_offset.sample(&mut rng))
        } else {
            let u = user_pick.sample(&mut rng) as usize - 1;
            (format!("u{u}"), user_offsets[u])
        };
        let p = placement_pick.sample(&mut rng) as usize - 1;
        let log_b1 = config.location
            + config.drift.shift(timestamp as f64 / 1000.0, fraction)
            + user_offset
            + placement_offsets[p]
            + noise.sample(&mut rng);
        let b1 = log_b1.exp();
        let b2 = b1 * ratio.sample(&mut rng);
        let b1 = Micros::from_units(b1);
        out.push(TrueAuction {
            timestamp,
            user,
            placement: format!("p{p}"),
            b1,
            b2: Micros::from_units(b2).min(b1),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Baseline {
    NoRes,
    PlRes,
    PlResOnline,
    Oracle,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::NoRes => "NO_RES",
            Baseline::PlRes => "PL_RES",
            Baseline::PlResOnline => "PL_RES_ONLINE",
            Baseline::Oracle => "ORACLE",
        }
    }
}

/// Per-placement fixed floors. `None` means no floor.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlacementFloors {
    pub floors: BTreeMap<String, Option<Micros>>,
}

/// For each placement, the grid level (or no floor) with the largest total
/// revenue over `train`.
pub fn fit_pl_res(grid: &FloorGrid, train: &[TrueAuction]) -> PlacementFloors {
    let k = grid.len();
    // index 0 is the no-floor cell
    let mut totals: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for a in train {
        let t = totals
            .entry(a.placement.as_str())
            .or_insert_with(|| vec![0.0; k + 1]);
        t[0] += a.b2.to_units();
        for (j, f) in grid.levels().iter().enumerate() {
            t[j + 1] += realized_revenue(*f, a.b1, a.b2);
        }
    }
    let floors = totals
        .into_iter()
        .map(|(p, t)| {
            let best = argmax_lowest(&t);
            (
                p.to_string(),
                if best == 0 {
                    None
                } else {
                    Some(grid.level(best - 1))
                },
            )
        })
        .collect();
    PlacementFloors { floors }
}

/// Average revenue of a baseline over `test`. `train` is used by `PL_RES`;
/// `rate` is the per-second decay rate of `PL_RES_ONLINE`.
pub fn run_baseline(
    baseline: Baseline,
    grid: &FloorGrid,
    train: &[TrueAuction],
    test: &[TrueAuction],
    rate: f64,
) -> f64 {
    if test.is_empty() {
        return 0.0;
    }
    let total: f64 = match baseline {
        Baseline::NoRes => test.iter().map(|a| a.b2.to_units()).sum(),
        Baseline::Oracle => test.iter().map(|a| a.b1.to_units()).sum(),
        Baseline::PlRes => {
            let fit = fit_pl_res(grid, train);
            test.iter()
                .map(|a| {
                    let floor = fit
                        .floors
                        .get(&a.placement)
                        .copied()
                        .flatten()
                        .unwrap_or(Micros::ZERO);
                    realized_revenue(floor, a.b1, a.b2)
                })
                .sum()
        }
        Baseline::PlResOnline => {
            let mut ewma = PlResOnline::new(grid.len(), rate);
            test.iter()
                .map(|a| {
                    let level = ewma.choose(&a.placement);
                    let r = realized_revenue(grid.level(level), a.b1, a.b2);
                    ewma.update(
                        &a.placement,
                        a.timestamp,
                        &simulate_revenue_vector(grid, a.b1, a.b2),
                    );
                    r
                })
                .sum()
        }
    };
    total / test.len() as f64
}

/// Per-placement, per-level exponentially weighted average revenue.
#[derive(Debug, Clone)]
pub struct PlResOnline {
    levels: usize,
    rate: f64,
    state: HashMap<String, (Timestamp, Vec<f64>, f64)>,
}

impl PlResOnline {
    pub fn new(levels: usize, rate: f64) -> Self {
        PlResOnline {
            levels,
            rate,
            state: HashMap::new(),
        }
    }

    pub fn choose(&self, placement: &str) -> usize {
        self.state
            .get(placement)
            .map_or(0, |(_, sums, _)| argmax_lowest(sums))
    }

    /// Averages with weight `exp(-rate * age_secs)`.
    pub fn update(&mut self, placement: &str, ts: Timestamp, revenue: &[f64]) {
        let (last, sums, weight) = self
            .state
            .entry(placement.to_string())
            .or_insert_with(|| (ts, vec![0.0; self.levels], 0.0));
        let g = (-self.rate * crate::domain::elapsed_secs(*last, ts).max(0.0)).exp();
        *weight = g * *weight + 1.0;
        for (s, r) in sums.iter_mut().zip(revenue) {
            *s = g * *s + r;
        }
        *last = ts;
    }

    pub fn average(&self, placement: &str) -> Option<Vec<f64>> {
        self.state
            .get(placement)
            .map(|(_, sums, w)| sums.iter().map(|s| s / w).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// The engine sees what the chosen floor reveals.
    Censored,
    /// The engine sees both bids whatever the floor.
    Uncensored,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub samples: usize,
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

impl LatencySummary {
    pub fn from_nanos(mut nanos: Vec<u64>) -> Self {
        if nanos.is_empty() {
            return LatencySummary::default();
        }
        nanos.sort_unstable();
        let pick = |q: f64| {
            let idx = ((q * nanos.len() as f64).ceil() as usize).clamp(1, nanos.len()) - 1;
            nanos[idx] as f64 / 1000.0
        };
        LatencySummary {
            samples: nanos.len(),
            p50_us: pick(0.50),
            p95_us: pick(0.95),
            p99_us: pick(0.99),
            max_us: *nanos.last().expect("non-empty") as f64 / 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopMetrics {
    pub auctions: usize,
    pub total_revenue: f64,
    pub average_revenue: f64,
    pub full_censored_rate: f64,
    pub half_censored_rate: f64,
    pub skipped: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub latency: Option<LatencySummary>,
}

/// Runs `engine` in closed loop over `stream` and returns the observable
/// log of what happened.
pub fn record_log(engine: &mut Engine, stream: &[TrueAuction]) -> Result<Vec<AuctionEvent>> {
    let mut out = Vec::with_capacity(stream.len());
    for a in stream {
        let decision = engine.choose_floor(&a.user, &a.placement, a.timestamp)?;
        let event = a.observe(decision.floor);
        engine.process_outcome(&event)?;
        out.push(event);
    }
    Ok(out)
}

/// Chooses a floor for every auction, collects the revenue the true bids
/// give, and feeds the outcome back. With `timed`, records per-auction
/// latency of choosing plus learning.
pub fn run_closed_loop(
    engine: &mut Engine,
    stream: &[TrueAuction],
    feedback: Feedback,
    timed: bool,
) -> Result<LoopMetrics> {
    let mut total = 0.0;
    let (mut full, mut half) = (0usize, 0usize);
    let skipped_before = engine.counters().skipped;
    let mut nanos = Vec::with_capacity(if timed { stream.len() } else { 0 });
    for a in stream {
        let start = timed.then(Instant::now);
        let decision = engine.choose_floor(&a.user, &a.placement, a.timestamp)?;
        let event = a.observe(decision.floor);
        let status = derive_censorship(&event)?;
        match status {
            CensorshipStatus::FullCensored { .. } => full += 1,
            CensorshipStatus::HalfCensored { .. } => half += 1,
            CensorshipStatus::Uncensored { .. } => {}
        }
        match feedback {
            Feedback::Censored => {
                engine.process_status(&a.user, &a.placement, a.timestamp, &status)?
            }
            Feedback::Uncensored => {
                engine.process_status(&a.user, &a.placement, a.timestamp, &a.uncensored())?
            }
        };
        if let Some(start) = start {
            nanos.push(start.elapsed().as_nanos() as u64);
        }
        total += realized_revenue(decision.floor, a.b1, a.b2);
    }
    let n = stream.len();
    let rate = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    Ok(LoopMetrics {
        auctions: n,
        total_revenue: total,
        average_revenue: if n == 0 { 0.0 } else { total / n as f64 },
        full_censored_rate: rate(full),
        half_censored_rate: rate(half),
        skipped: engine.counters().skipped - skipped_before,
        latency: timed.then(|| LatencySummary::from_nanos(nanos)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentSetting {
    /// Uncensored training used to warm-start the models; censored test.
    S1,
    /// Censored training used only for tuning; cold-start censored test.
    S2,
    /// Uncensored training used only for tuning; cold-start censored test.
    S3,
}

impl ExperimentSetting {
    /// Feedback used to score tuning cells on the training split.
    pub fn training_feedback(self) -> Feedback {
        match self {
            ExperimentSetting::S2 => Feedback::Censored,
            ExperimentSetting::S1 | ExperimentSetting::S3 => Feedback::Uncensored,
        }
    }
}

/// Grid for hyper-parameter search over the revenue model. A forgetting
/// rate `r` (per second) sets `γ = exp(-r)` for users and `exp(-r / 10)`
/// for placements and the bias; a precision replaces the prior precision of
/// the free user-side components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    pub forgetting_rates: Vec<f64>,
    pub precisions: Vec<f64>,
}

impl Default for TuneGrid {
    fn default() -> Self {
        TuneGrid::standard()
    }
}

impl TuneGrid {
    pub fn cells(&self) -> usize {
        self.forgetting_rates.len() * self.precisions.len()
    }

    /// Six log-spaced values per axis: rates 1e-6..1e-1, precisions 1..1e5.
    pub fn standard() -> Self {
        TuneGrid {
            forgetting_rates: (0..6).map(|i| 10f64.powi(i - 6)).collect(),
            precisions: (0..6).map(|i| 10f64.powi(i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneCell {
    pub forgetting_rate: f64,
    pub precision: f64,
    pub average_revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: HyperParams,
    pub best_cell: TuneCell,
    pub cells: Vec<TuneCell>,
}

/// Replaces the free (unpinned) diagonal precisions of a prior.
fn with_free_precision(prior: &FactorPrior, precision: f64) -> FactorPrior {
    let n = prior.dim();
    let mut out = prior.clone();
    for i in 0..n {
        if prior.precision[i * n + i] < crate::params::PINNED_PRECISION {
            out.precision[i * n + i] = precision;
        }
    }
    out
}

pub fn apply_cell(base: &HyperParams, forgetting_rate: f64, precision: f64) -> HyperParams {
    let mut h = base.clone();
    h.revenue.forgetting = Forgetting::from_rates(forgetting_rate, forgetting_rate / 10.0);
    h.revenue.user_prior = with_free_precision(&h.revenue.user_prior, precision);
    h
}

/// Exhaustive search maximising the closed-loop average revenue on `train`
/// with the setting's training feedback. Every cell is logged; ties keep the
/// first cell in grid order.
pub fn tune_hyperparams(
    grid_spec: &TuneGrid,
    setting: ExperimentSetting,
    base: &EngineConfig,
    train: &[TrueAuction],
) -> Result<TuneResult> {
    if grid_spec.cells() == 0 {
        return Err(Error::InvalidConfig("tuning grid is empty".into()));
    }
    let mut cells = Vec::with_capacity(grid_spec.cells());
    let mut best: Option<(usize, HyperParams)> = None;
    for &rate in &grid_spec.forgetting_rates {
        for &precision in &grid_spec.precisions {
            let hyper = apply_cell(&base.hyper, rate, precision);
            let mut config = base.clone();
            config.hyper = hyper.clone();
            let mut engine = Engine::new(config)?;
            let m = run_closed_loop(&mut engine, train, setting.training_feedback(), false)?;
            log::info!(
                "tune rate={rate:e} precision={precision:e} avg={:.6}",
                m.average_revenue
            );
            cells.push(TuneCell {
                forgetting_rate: rate,
                precision,
                average_revenue: m.average_revenue,
            });
            let better = best
                .as_ref()
                .is_none_or(|(i, _)| m.average_revenue > cells[*i].average_revenue);
            if better {
                best = Some((cells.len() - 1, hyper));
            }
        }
    }
    let (i, best) = best.expect("non-empty grid");
    Ok(TuneResult {
        best,
        best_cell: cells[i].clone(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Share of the stream used as the training split.
    pub train_fraction: f64,
    pub variants: Vec<Variant>,
    /// Also run each variant with uncensored feedback on the test split.
    pub uncensored_reference: bool,
    pub pl_res_online_rate: f64,
    /// ALS sweeps for the S1 warm start.
    pub warm_start_iterations: usize,
    #[serde(default)]
    pub tune: Option<TuneGrid>,
    pub timed: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            train_fraction: 0.5,
            variants: Variant::ALL.to_vec(),
            uncensored_reference: false,
            pl_res_online_rate: 1e-4,
            warm_start_iterations: 5,
            tune: None,
            timed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    pub average_revenue: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<LoopMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub setting: ExperimentSetting,
    pub seed: u64,
    pub train_auctions: usize,
    pub test_auctions: usize,
    pub levels: usize,
    pub methods: Vec<MethodResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tuning: Option<Vec<TuneCell>>,
}

impl ExperimentReport {
    pub fn average(&self, method: &str) -> Option<f64> {
        self.methods
            .iter()
            .find(|m| m.method == method)
            .map(|m| m.average_revenue)
    }
}

fn training_events(grid: &FloorGrid, train: &[TrueAuction]) -> Vec<TrainingEvent> {
    train
        .iter()
        .map(|a| TrainingEvent {
            user: a.user.clone(),
            placement: a.placement.clone(),
            timestamp: a.timestamp,
            revenue: simulate_revenue_vector(grid, a.b1, a.b2),
        })
        .collect()
}

/// Engine for the test split of `setting`: warm-started from the training
/// split for S1, fresh otherwise.
pub fn prepare_engine(
    setting: ExperimentSetting,
    config: EngineConfig,
    train: &[TrueAuction],
    iterations: usize,
) -> Result<Engine> {
    match setting {
        ExperimentSetting::S1 if !train.is_empty() => {
            let events = training_events(&config.grid, train);
            let model = batch_fit(
                &events,
                config.grid.len(),
                &config.hyper.revenue,
                iterations,
                config.seed,
            )?;
            let mut engine = Engine::with_revenue_model(config, model)?;
            let grid = engine.grid().clone();
            if let Some(store) = engine.bid_models_mut() {
                for a in train {
                    store.update_from_status(
                        &grid,
                        &a.user,
                        &a.placement,
                        a.timestamp,
                        &a.uncensored(),
                    )?;
                }
            }
            Ok(engine)
        }
        _ => Engine::new(config),
    }
}

/// Runs the train/test protocol of `setting` on a generated stream.
pub fn run_experiment(
    setting: ExperimentSetting,
    engine_config: &EngineConfig,
    stream_config: &StreamConfig,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    if !(0.0..1.0).contains(&options.train_fraction) {
        return Err(Error::InvalidConfig(
            "train fraction must be in [0, 1)".into(),
        ));
    }
    engine_config.validate()?;
    let stream = generate_stream(stream_config)?;
    let split = (stream.len() as f64 * options.train_fraction).round() as usize;
    let (train, test) = stream.split_at(split);
    let grid = &engine_config.grid;

    let mut config = engine_config.clone();
    let mut tuning = None;
    if let Some(spec) = &options.tune {
        let result = tune_hyperparams(spec, setting, &config, train)?;
        config.hyper = result.best;
        tuning = Some(result.cells);
    }

    let mut methods = Vec::new();
    for b in [
        Baseline::NoRes,
        Baseline::PlRes,
        Baseline::PlResOnline,
        Baseline::Oracle,
    ] {
        let avg = run_baseline(b, grid, train, test, options.pl_res_online_rate);
        methods.push(MethodResult {
            method: b.name().to_string(),
            average_revenue: avg,
            metrics: None,
        });
    }
    for &variant in &options.variants {
        let mut cfg = EngineConfig::new(
            variant,
            config.grid.clone(),
            config.hyper.clone(),
            config.seed,
        );
        cfg.capacity = config.capacity;
        if variant == config.variant {
            cfg.selection = config.selection;
        }
        let mut runs = vec![(format!("{variant:?}"), Feedback::Censored)];
        if options.uncensored_reference {
            runs.push((format!("{variant:?}_UNCENSORED"), Feedback::Uncensored));
        }
        for (name, feedback) in runs {
            let mut engine =
                prepare_engine(setting, cfg.clone(), train, options.warm_start_iterations)?;
            let m = run_closed_loop(&mut engine, test, feedback, options.timed)?;
            methods.push(MethodResult {
                method: name,
                average_revenue: m.average_revenue,
                metrics: Some(m),
            });
        }
    }
    Ok(ExperimentReport {
        setting,
        seed: stream_config.seed,
        train_auctions: train.len(),
        test_auctions: test.len(),
        levels: grid.len(),
        methods,
        tuning,
    })
}

/// Grid used by the experiment defaults: no-floor level plus 31 geometric
/// levels between 0.05 and 20 currency units.
pub fn experiment_grid() -> FloorGrid {
    FloorGrid::with_zero_level(32, 0.05, 20.0, Spacing::Geometric).expect("valid grid")
}
