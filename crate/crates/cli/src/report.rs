use std::fmt::Write;

use reserve_core::bench::{BenchReport, PathLatency};
use reserve_core::checkpoint::CheckpointHeader;
use reserve_core::replay::ReplayDiagnostics;
use reserve_core::simulation::{ExperimentReport, ExperimentSetting, TuneCell};
use reserve_core::HyperParams;
use serde::{Deserialize, Serialize};

use crate::config::Config;

pub const SIMULATE_FORMAT: &str = "reserve-simulate/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub format: String,
    pub seed: u64,
    /// The configuration after flags were applied.
    pub config: Config,
    pub result: ExperimentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub log: String,
    pub checkpoint_in: Option<CheckpointHeader>,
    pub checkpoint_out: Option<CheckpointHeader>,
    pub diagnostics: ReplayDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub seed: u64,
    pub setting: ExperimentSetting,
    pub train_auctions: usize,
    pub best_cell: TuneCell,
    pub best: HyperParams,
    pub cells: Vec<TuneCell>,
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

pub fn simulate_table(r: &SimulateReport) -> String {
    let x = &r.result;
    let mut s = String::new();
    writeln!(
        s,
        "setting {:?}  seed {}  train {}  test {}  levels {}",
        x.setting, x.seed, x.train_auctions, x.test_auctions, x.levels
    )
    .unwrap();
    writeln!(
        s,
        "{:<16} {:>12} {:>10} {:>10} {:>8}",
        "method", "avg revenue", "full cens", "half cens", "skipped"
    )
    .unwrap();
    for m in &x.methods {
        match &m.metrics {
            Some(l) => writeln!(
                s,
                "{:<16} {:>12.4} {:>10} {:>10} {:>8}",
                m.method,
                m.average_revenue,
                pct(l.full_censored_rate),
                pct(l.half_censored_rate),
                l.skipped
            ),
            None => writeln!(s, "{:<16} {:>12.4}", m.method, m.average_revenue),
        }
        .unwrap();
    }
    s
}

pub fn replay_table(r: &ReplayReport) -> String {
    let d = &r.diagnostics;
    let mut s = String::new();
    writeln!(s, "log {}", r.log).unwrap();
    writeln!(
        s,
        "events {}  updated {}  skipped {}  rejected lines {}",
        d.events,
        d.updated,
        d.skipped,
        d.rejected.len()
    )
    .unwrap();
    writeln!(
        s,
        "uncensored {}  half-censored {}  full-censored {}",
        d.uncensored, d.half_censored, d.full_censored
    )
    .unwrap();
    writeln!(
        s,
        "on-grid floors {}  predicted {:.4}  realized {:.4}  MAE {:.4}  RMSE {:.4}",
        d.comparable, d.predicted_revenue, d.realized_revenue, d.mean_abs_error, d.rmse
    )
    .unwrap();
    s
}

pub fn bench_table(r: &BenchReport) -> String {
    let c = &r.config;
    let mut s = String::new();
    writeln!(
        s,
        "variant {:?}  levels {}  latent dim {}  warm-up {}  timed {}",
        c.variant, c.levels, c.latent_dim, c.warmup, c.iterations
    )
    .unwrap();
    writeln!(
        s,
        "{:<28} {:>10} {:>10} {:>10} {:>10}",
        "path (µs)", "p50", "p95", "p99", "max"
    )
    .unwrap();
    let rows = |s: &mut String, name: &str, p: &PathLatency| {
        for (part, l) in [
            ("choose", &p.choose_floor),
            ("process", &p.process_outcome),
            ("total", &p.total),
        ] {
            writeln!(
                s,
                "{:<28} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
                format!("{name} {part}"),
                l.p50_us,
                l.p95_us,
                l.p99_us,
                l.max_us
            )
            .unwrap();
        }
    };
    rows(&mut s, "censored", &r.censored);
    rows(&mut s, "uncensored", &r.uncensored);
    s
}

pub fn tune_table(r: &TuneReport) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "setting {:?}  seed {}  train {}",
        r.setting, r.seed, r.train_auctions
    )
    .unwrap();
    writeln!(
        s,
        "{:>16} {:>12} {:>12}",
        "forgetting rate", "precision", "avg revenue"
    )
    .unwrap();
    for c in &r.cells {
        let mark = if c == &r.best_cell { "  *" } else { "" };
        writeln!(
            s,
            "{:>16e} {:>12e} {:>12.4}{mark}",
            c.forgetting_rate, c.precision, c.average_revenue
        )
        .unwrap();
    }
    s
}
