//! Auction logs, one JSON object per line:
//!
//! ```text
//! {"ts": 1700000000000, "user": "u1", "placement": "p3", "floor": 250000, "outcome": "lost"}
//! {"ts": 1700000000450, "user": "u2", "placement": "p3", "floor": 250000, "outcome": {"b1": 900000, "close": 310000}}
//! ```
//!
//! Monetary fields are integer micro-units. Lines must be nondecreasing in
//! `ts`; blank lines are ignored.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{derive_censorship, AuctionEvent, Micros, Outcome, Timestamp};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    ts: Timestamp,
    user: String,
    placement: String,
    floor: i64,
    outcome: RecordOutcome,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RecordOutcome {
    Lost(LostTag),
    Won(WonRecord),
}

#[derive(Debug, Serialize, Deserialize)]
enum LostTag {
    #[serde(rename = "lost")]
    Lost,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WonRecord {
    b1: i64,
    close: i64,
}

/// Parses one log line into a validated event.
pub fn parse_line(line: &str) -> std::result::Result<AuctionEvent, String> {
    let record: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if record.ts < 0 {
        return Err("negative timestamp".into());
    }
    let outcome = match record.outcome {
        RecordOutcome::Lost(_) => Outcome::Lost,
        RecordOutcome::Won(w) => Outcome::Won {
            first_bid: Micros(w.b1),
            closing_price: Micros(w.close),
        },
    };
    let event = AuctionEvent {
        timestamp: record.ts,
        user_id: record.user,
        placement_id: record.placement,
        applied_floor: Micros(record.floor),
        outcome,
    };
    event.validate().map_err(|e| e.to_string())?;
    derive_censorship(&event).map_err(|e| e.to_string())?;
    Ok(event)
}

pub fn format_event(event: &AuctionEvent) -> String {
    let outcome = match event.outcome {
        Outcome::Lost => RecordOutcome::Lost(LostTag::Lost),
        Outcome::Won {
            first_bid,
            closing_price,
        } => RecordOutcome::Won(WonRecord {
            b1: first_bid.0,
            close: closing_price.0,
        }),
    };
    let record = Record {
        ts: event.timestamp,
        user: event.user_id.clone(),
        placement: event.placement_id.clone(),
        floor: event.applied_floor.0,
        outcome,
    };
    serde_json::to_string(&record).expect("log records always serialise")
}

pub fn write_log<W: Write>(mut out: W, events: &[AuctionEvent]) -> Result<()> {
    for e in events {
        writeln!(out, "{}", format_event(e))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// The first bad or out-of-order line aborts with its line number.
    #[default]
    Strict,
    /// Bad and out-of-order lines are skipped and counted.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejected {
    pub line: usize,
    pub message: String,
}

/// Streaming reader yielding `(line number, event)` pairs.
pub struct LogReader<R> {
    input: R,
    mode: ParseMode,
    line_no: usize,
    last_ts: Option<Timestamp>,
    rejected: Vec<Rejected>,
    buf: String,
}

impl<R: BufRead> LogReader<R> {
    pub fn new(input: R, mode: ParseMode) -> Self {
        LogReader {
            input,
            mode,
            line_no: 0,
            last_ts: None,
            rejected: Vec::new(),
            buf: String::new(),
        }
    }

    /// Requires later lines to be no earlier than `ts`, as when continuing
    /// a log that was split.
    pub fn after(mut self, ts: Option<Timestamp>) -> Self {
        self.last_ts = ts;
        self
    }

    pub fn rejected(&self) -> &[Rejected] {
        &self.rejected
    }

    pub fn into_rejected(self) -> Vec<Rejected> {
        self.rejected
    }

    fn check(&self, line: &str) -> std::result::Result<AuctionEvent, String> {
        let event = parse_line(line)?;
        if let Some(last) = self.last_ts {
            if event.timestamp < last {
                return Err(format!(
                    "timestamp {} earlier than previous {last}",
                    event.timestamp
                ));
            }
        }
        Ok(event)
    }
}

impl<R: BufRead> Iterator for LogReader<R> {
    type Item = Result<(usize, AuctionEvent)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            match self.check(line) {
                Ok(event) => {
                    self.last_ts = Some(event.timestamp);
                    return Some(Ok((self.line_no, event)));
                }
                Err(message) => match self.mode {
                    ParseMode::Strict => {
                        return Some(Err(Error::Log {
                            line: self.line_no,
                            message,
                        }))
                    }
                    ParseMode::Lenient => self.rejected.push(Rejected {
                        line: self.line_no,
                        message,
                    }),
                },
            }
        }
    }
}
