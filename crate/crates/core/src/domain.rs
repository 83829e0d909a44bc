//! Core value types: money, the floor grid, auction events and censorship.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monetary amount in fixed-point micro-units (1 currency unit = 1_000_000).
///
/// Events, grids and checkpoints carry `Micros` so that replay is bit-exact;
/// the models work on `f64` currency units obtained with [`Micros::to_units`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Micros(pub i64);

impl Micros {
    pub const ZERO: Micros = Micros(0);
    pub const PER_UNIT: f64 = 1_000_000.0;

    pub fn from_units(units: f64) -> Self {
        Micros((units * Self::PER_UNIT).round() as i64)
    }

    pub fn to_units(self) -> f64 {
        self.0 as f64 / Self::PER_UNIT
    }
}

impl fmt::Display for Micros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.to_units())
    }
}

/// Milliseconds since the Unix epoch.
pub type Timestamp = i64;

/// Elapsed seconds between two millisecond timestamps.
pub fn elapsed_secs(from: Timestamp, to: Timestamp) -> f64 {
    (to - from) as f64 / 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Geometric,
    Linear,
}

/// The K discrete reserve-price levels. Bid bins reuse the same levels.
///
/// Level indices are zero-based in code: level `k` covers the bid bin
/// `[levels[k], levels[k + 1])` and the top level is open-ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Micros>", into = "Vec<Micros>")]
pub struct FloorGrid {
    levels: Vec<Micros>,
}

pub const DEFAULT_LEVELS: usize = 100;

impl FloorGrid {
    pub fn new(levels: Vec<Micros>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "floor grid needs at least 2 levels, got {}",
                levels.len()
            )));
        }
        if levels[0].0 < 0 {
            return Err(Error::InvalidConfig(
                "floor grid levels must be non-negative".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "floor grid levels must be strictly increasing".into(),
            ));
        }
        Ok(FloorGrid { levels })
    }

    /// A leading zero level (no reserve) followed by `k - 1` levels spaced
    /// between `min` and `max` currency units.
    pub fn with_zero_level(k: usize, min: f64, max: f64, spacing: Spacing) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfig(format!(
                "floor grid needs at least 2 levels, got {k}"
            )));
        }
        if !(min > 0.0 && max > min) {
            return Err(Error::InvalidConfig(format!(
                "invalid grid bounds [{min}, {max}]"
            )));
        }
        let n = k - 1;
        let mut levels = Vec::with_capacity(k);
        levels.push(Micros::ZERO);
        for i in 0..n {
            let t = if n == 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            };
            let v = match spacing {
                Spacing::Geometric => min * (max / min).powf(t),
                Spacing::Linear => min + (max - min) * t,
            };
            levels.push(Micros::from_units(v));
        }
        FloorGrid::new(levels)
    }

    /// `k` levels spaced linearly from `min` to `max` (both inclusive).
    pub fn linear(k: usize, min: f64, max: f64) -> Result<Self> {
        if k < 2 || !(max > min) || min < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "invalid linear grid k={k} [{min}, {max}]"
            )));
        }
        let levels = (0..k)
            .map(|i| Micros::from_units(min + (max - min) * i as f64 / (k - 1) as f64))
            .collect();
        FloorGrid::new(levels)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn levels(&self) -> &[Micros] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Micros {
        self.levels[k]
    }

    /// Level value in currency units.
    pub fn value(&self, k: usize) -> f64 {
        self.levels[k].to_units()
    }

    pub fn values(&self) -> Vec<f64> {
        self.levels.iter().map(|m| m.to_units()).collect()
    }

    /// Largest level index with `levels[k] <= value`, or `None` below the grid.
    pub fn snap(&self, value: Micros) -> Option<usize> {
        match self.levels.binary_search(&value) {
            Ok(k) => Some(k),
            Err(0) => None,
            Err(pos) => Some(pos - 1),
        }
    }

    /// Bin used for bid-model membership: like [`snap`](Self::snap), with
    /// values below the grid assigned to the lowest bin.
    pub fn bin(&self, value: Micros) -> usize {
        self.snap(value).unwrap_or(0)
    }

    /// Smallest level index with `levels[k] >= value`; `len()` above the
    /// grid. A value known to be below `value` lies in a bin below this one.
    pub fn ceil_bin(&self, value: Micros) -> usize {
        self.levels.partition_point(|l| *l < value)
    }

    /// Exact index of an on-grid value.
    pub fn index_of(&self, value: Micros) -> Option<usize> {
        self.levels.binary_search(&value).ok()
    }
}

impl Default for FloorGrid {
    fn default() -> Self {
        FloorGrid::with_zero_level(DEFAULT_LEVELS, 0.05, 50.0, Spacing::Geometric)
            .expect("default grid is valid")
    }
}

impl TryFrom<Vec<Micros>> for FloorGrid {
    type Error = Error;

    fn try_from(levels: Vec<Micros>) -> Result<Self> {
        FloorGrid::new(levels)
    }
}

impl From<FloorGrid> for Vec<Micros> {
    fn from(grid: FloorGrid) -> Self {
        grid.levels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Lost,
    Won {
        first_bid: Micros,
        closing_price: Micros,
    },
}

/// One auction's observables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionEvent {
    pub timestamp: Timestamp,
    pub user_id: String,
    pub placement_id: String,
    pub applied_floor: Micros,
    pub outcome: Outcome,
}

impl AuctionEvent {
    /// The event a second-price auction with the given true bids produces
    /// under `floor`.
    pub fn from_bids(
        timestamp: Timestamp,
        user_id: impl Into<String>,
        placement_id: impl Into<String>,
        floor: Micros,
        b1: Micros,
        b2: Micros,
    ) -> Self {
        let outcome = if floor <= b1 {
            Outcome::Won {
                first_bid: b1,
                closing_price: floor.max(b2),
            }
        } else {
            Outcome::Lost
        };
        AuctionEvent {
            timestamp,
            user_id: user_id.into(),
            placement_id: placement_id.into(),
            applied_floor: floor,
            outcome,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.applied_floor.0 < 0 {
            return Err(Error::InvalidEvent("negative floor".into()));
        }
        if let Outcome::Won {
            first_bid,
            closing_price,
        } = self.outcome
        {
            if closing_price > first_bid {
                return Err(Error::InvalidEvent(format!(
                    "closing price {closing_price} exceeds first bid {first_bid}"
                )));
            }
            if closing_price < self.applied_floor {
                return Err(Error::InvalidEvent(format!(
                    "closing price {closing_price} below floor {}",
                    self.applied_floor
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CensorshipStatus {
    Uncensored { b1: Micros, b2: Micros },
    HalfCensored { b1: Micros, censor_point: Micros },
    FullCensored { censor_point: Micros },
}

impl CensorshipStatus {
    pub fn is_censored(&self) -> bool {
        !matches!(self, CensorshipStatus::Uncensored { .. })
    }
}

pub fn derive_censorship(event: &AuctionEvent) -> Result<CensorshipStatus> {
    event.validate()?;
    Ok(match event.outcome {
        Outcome::Lost => CensorshipStatus::FullCensored {
            censor_point: event.applied_floor,
        },
        Outcome::Won {
            first_bid,
            closing_price,
        } if closing_price == event.applied_floor => CensorshipStatus::HalfCensored {
            b1: first_bid,
            censor_point: event.applied_floor,
        },
        Outcome::Won {
            first_bid,
            closing_price,
        } => CensorshipStatus::Uncensored {
            b1: first_bid,
            b2: closing_price,
        },
    })
}
