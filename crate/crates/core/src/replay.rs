//! Feeding recorded auction logs through an engine.
//!
//! Realised revenue under the engine's own floors cannot be computed from a
//! log recorded under other floors, so replay reports how well the model
//! predicted the revenue at the floor that was actually applied, on the
//! events whose floor lies on the grid.

use serde::{Deserialize, Serialize};

use crate::domain::{AuctionEvent, Outcome};
use crate::engine::{Engine, Processed};
use crate::error::{Error, Result};
use crate::jsonl::{ParseMode, Rejected};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayDiagnostics {
    pub events: u64,
    pub updated: u64,
    pub skipped: u64,
    pub uncensored: u64,
    pub half_censored: u64,
    pub full_censored: u64,
    /// Events whose historical floor is a grid level.
    pub comparable: u64,
    pub predicted_revenue: f64,
    pub realized_revenue: f64,
    pub mean_abs_error: f64,
    pub rmse: f64,
    /// Lines dropped in lenient mode.
    pub rejected: Vec<Rejected>,
}

pub struct Replayer<'a> {
    engine: &'a mut Engine,
    mode: ParseMode,
    diag: ReplayDiagnostics,
    abs_error: f64,
    sq_error: f64,
}

impl<'a> Replayer<'a> {
    pub fn new(engine: &'a mut Engine, mode: ParseMode) -> Self {
        Replayer {
            engine,
            mode,
            diag: ReplayDiagnostics::default(),
            abs_error: 0.0,
            sq_error: 0.0,
        }
    }

    /// Processes one event read from `line`. In strict mode an event the
    /// engine rejects aborts the replay; in lenient mode it is counted.
    pub fn feed(&mut self, line: usize, event: &AuctionEvent) -> Result<()> {
        let before = *self.engine.counters();
        let level = self.engine.grid().index_of(event.applied_floor);
        let predicted = match level {
            Some(k) => Some(
                self.engine
                    .choose_floor(&event.user_id, &event.placement_id, event.timestamp)
                    .map(|d| d.profile.expected_revenue[k]),
            ),
            None => None,
        };
        let processed = predicted
            .transpose()
            .and_then(|p| Ok((p, self.engine.process_outcome(event)?)));
        let (predicted, processed) = match processed {
            Ok(x) => x,
            Err(e) => {
                return match self.mode {
                    ParseMode::Strict => Err(Error::Log {
                        line,
                        message: e.to_string(),
                    }),
                    ParseMode::Lenient => {
                        self.diag.rejected.push(Rejected {
                            line,
                            message: e.to_string(),
                        });
                        Ok(())
                    }
                }
            }
        };
        let after = *self.engine.counters();
        let d = &mut self.diag;
        d.events += 1;
        match processed {
            Processed::Updated => d.updated += 1,
            Processed::Skipped => d.skipped += 1,
        }
        d.uncensored += after.uncensored - before.uncensored;
        d.half_censored += after.half_censored - before.half_censored;
        d.full_censored += after.full_censored - before.full_censored;
        if let Some(p) = predicted {
            let realized = match event.outcome {
                Outcome::Lost => 0.0,
                Outcome::Won { closing_price, .. } => closing_price.to_units(),
            };
            d.comparable += 1;
            d.predicted_revenue += p;
            d.realized_revenue += realized;
            self.abs_error += (p - realized).abs();
            self.sq_error += (p - realized).powi(2);
        }
        Ok(())
    }

    pub fn reject(&mut self, rejected: Rejected) {
        self.diag.rejected.push(rejected);
    }

    pub fn finish(mut self) -> ReplayDiagnostics {
        if self.diag.comparable > 0 {
            let n = self.diag.comparable as f64;
            self.diag.mean_abs_error = self.abs_error / n;
            self.diag.rmse = (self.sq_error / n).sqrt();
        }
        self.diag.rejected.sort_by_key(|r| r.line);
        self.diag
    }
}

/// Replays `events` in order.
pub fn replay(
    engine: &mut Engine,
    events: &[AuctionEvent],
    mode: ParseMode,
) -> Result<ReplayDiagnostics> {
    let mut r = Replayer::new(engine, mode);
    for (i, e) in events.iter().enumerate() {
        r.feed(i + 1, e)?;
    }
    Ok(r.finish())
}
