//! Revenue vectors under every floor level, observed or expected.
//!
//! For an auction with first bid `b1` and second bid `b2`, setting floor
//! `f` yields `max(f, b2)` if `f <= b1` and nothing otherwise. When the
//! auction was censored at floor index `a`, the unseen bids are replaced by
//! their distribution conditioned on being below `f_a`.

use serde::{Deserialize, Serialize};

use crate::bid::BidCdf;
use crate::domain::{CensorshipStatus, FloorGrid, Micros};

/// How the engine turns a censored auction into a revenue target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    /// Expected revenue under the learned bid distributions.
    M1,
    /// Unknown bids are taken as zero, or as the floor for the second bid.
    M2,
    /// Levels whose revenue is unknown are left out of the update.
    M3,
    /// As `M3`, with an upper-confidence exploration bonus when choosing.
    M4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::M1, Variant::M2, Variant::M3, Variant::M4];

    pub fn uses_bid_models(self) -> bool {
        self == Variant::M1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    Expected,
    Imputed,
    Masked,
}

/// Per-level revenue target with a mask of the levels that enter the update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedRevenue {
    pub values: Vec<f64>,
    pub active: Vec<bool>,
    pub provenance: Vec<Provenance>,
}

impl SimulatedRevenue {
    fn all(values: Vec<f64>, provenance: Provenance) -> Self {
        let n = values.len();
        SimulatedRevenue {
            values,
            active: vec![true; n],
            provenance: vec![provenance; n],
        }
    }
}

/// Revenue at each level for known bids, in currency units.
pub fn simulate_revenue_vector(grid: &FloorGrid, b1: Micros, b2: Micros) -> Vec<f64> {
    grid.levels()
        .iter()
        .map(|&f| if f <= b1 { f.max(b2).to_units() } else { 0.0 })
        .collect()
}

/// `P(V < b_k | V < f_a)` for `k = 0..=a`. When the conditioning event has
/// zero estimated probability all mass is put in the lowest bin.
fn conditional_below(cdf: &BidCdf, a: usize) -> Vec<f64> {
    let norm = cdf.below(a);
    if norm > 0.0 && norm.is_finite() {
        (0..=a).map(|k| (cdf.below(k) / norm).min(1.0)).collect()
    } else {
        (0..=a).map(|k| if k == 0 { 0.0 } else { 1.0 }).collect()
    }
}

/// `Σ_{k'=k+1}^{a-1} f_{k'} φ(k')` for every `k < a`, where `φ` is the
/// conditional pmf: the second bid's contribution when it exceeds `f_k`.
/// The floor terms are collected into one coefficient by the callers so
/// that point-mass inputs give exact results.
fn upper_sum(values: &[f64], cond: &[f64], a: usize) -> Vec<f64> {
    let mut out = vec![0.0; a];
    let mut suffix = 0.0;
    for k in (0..a).rev() {
        out[k] = suffix;
        suffix += values[k] * (cond[k + 1] - cond[k]);
    }
    out
}

/// Expected revenue per level when both bids were below the floor at index
/// `censor_level`.
pub fn expected_revenue_full_censored(
    grid: &FloorGrid,
    first: &BidCdf,
    second: &BidCdf,
    censor_level: usize,
) -> Vec<f64> {
    let values = grid.values();
    let a = censor_level.min(grid.len());
    let c1 = conditional_below(first, a);
    let c2 = conditional_below(second, a);
    let mut out = upper_sum(&values, &c2, a);
    for k in 0..a {
        // f_k (P(b1 >= f_k) - P(b2 > f_k))
        out[k] += values[k] * (c2[k + 1] - c1[k]);
    }
    out.resize(grid.len(), 0.0);
    out
}

/// Expected revenue per level when the first bid `b1` was seen and the
/// second was below the floor at index `censor_level`.
pub fn expected_revenue_half_censored(
    grid: &FloorGrid,
    second: &BidCdf,
    b1: Micros,
    censor_level: usize,
) -> Vec<f64> {
    let values = grid.values();
    let a = censor_level.min(grid.len());
    let c2 = conditional_below(second, a);
    let mut out = upper_sum(&values, &c2, a);
    for k in 0..a {
        out[k] += values[k] * c2[k + 1];
    }
    out.extend((a..grid.len()).map(|k| if grid.level(k) <= b1 { values[k] } else { 0.0 }));
    out
}

/// Training target for one auction. Returns `None` when the variant skips
/// the auction. `bids` (first, second) is required for [`Variant::M1`] on
/// censored auctions.
pub fn build_training_target(
    grid: &FloorGrid,
    status: &CensorshipStatus,
    variant: Variant,
    bids: Option<(&BidCdf, &BidCdf)>,
) -> Option<SimulatedRevenue> {
    let k = grid.len();
    match (*status, variant) {
        (CensorshipStatus::Uncensored { b1, b2 }, _) => Some(SimulatedRevenue::all(
            simulate_revenue_vector(grid, b1, b2),
            Provenance::Observed,
        )),
        (CensorshipStatus::FullCensored { censor_point }, Variant::M1) => {
            let (first, second) = bids.expect("bid distributions required");
            let a = grid.ceil_bin(censor_point);
            let values = expected_revenue_full_censored(grid, first, second, a);
            let mut target = SimulatedRevenue::all(values, Provenance::Expected);
            target.provenance[a..].fill(Provenance::Observed);
            Some(target)
        }
        (CensorshipStatus::HalfCensored { b1, censor_point }, Variant::M1) => {
            let (_, second) = bids.expect("bid distributions required");
            let a = grid.ceil_bin(censor_point);
            let values = expected_revenue_half_censored(grid, second, b1, a);
            let mut target = SimulatedRevenue::all(values, Provenance::Expected);
            target.provenance[a..].fill(Provenance::Observed);
            Some(target)
        }
        (CensorshipStatus::FullCensored { .. }, Variant::M2) => {
            Some(SimulatedRevenue::all(vec![0.0; k], Provenance::Imputed))
        }
        (CensorshipStatus::HalfCensored { b1, censor_point }, Variant::M2) => {
            Some(SimulatedRevenue::all(
                simulate_revenue_vector(grid, b1, censor_point),
                Provenance::Imputed,
            ))
        }
        (CensorshipStatus::FullCensored { .. }, Variant::M3 | Variant::M4) => None,
        (CensorshipStatus::HalfCensored { b1, censor_point }, Variant::M3 | Variant::M4) => {
            let a = grid.ceil_bin(censor_point);
            // the second bid is below every level from `a` up, so revenue there is known
            let values = simulate_revenue_vector(grid, b1, Micros::ZERO);
            let mut target = SimulatedRevenue::all(values, Provenance::Observed);
            for k in 0..a.min(k) {
                target.values[k] = 0.0;
                target.active[k] = false;
                target.provenance[k] = Provenance::Masked;
            }
            Some(target)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> FloorGrid {
        FloorGrid::new((0..6).map(|v| Micros(v * 1_000_000)).collect()).unwrap()
    }

    fn u(v: i64) -> Micros {
        Micros(v * 1_000_000)
    }

    #[test]
    fn revenue_vector() {
        let r = simulate_revenue_vector(&grid(), u(4), u(2));
        assert_eq!(r, vec![2.0, 2.0, 2.0, 3.0, 4.0, 0.0]);
    }

    #[test]
    fn uncensored_target_is_observed() {
        let status = CensorshipStatus::Uncensored { b1: u(4), b2: u(2) };
        for v in Variant::ALL {
            let t = build_training_target(&grid(), &status, v, None).unwrap();
            assert_eq!(t.values, vec![2.0, 2.0, 2.0, 3.0, 4.0, 0.0]);
            assert!(t.active.iter().all(|&a| a));
        }
    }

    #[test]
    fn m2_imputes() {
        let full = CensorshipStatus::FullCensored { censor_point: u(3) };
        assert_eq!(
            build_training_target(&grid(), &full, Variant::M2, None)
                .unwrap()
                .values,
            vec![0.0; 6]
        );
        let half = CensorshipStatus::HalfCensored {
            b1: u(4),
            censor_point: u(3),
        };
        let t = build_training_target(&grid(), &half, Variant::M2, None).unwrap();
        assert_eq!(t.values, vec![3.0, 3.0, 3.0, 3.0, 4.0, 0.0]);
    }

    #[test]
    fn m3_masks_and_skips() {
        let full = CensorshipStatus::FullCensored { censor_point: u(3) };
        assert!(build_training_target(&grid(), &full, Variant::M3, None).is_none());
        assert!(build_training_target(&grid(), &full, Variant::M4, None).is_none());
        let half = CensorshipStatus::HalfCensored {
            b1: u(4),
            censor_point: u(3),
        };
        let t = build_training_target(&grid(), &half, Variant::M3, None).unwrap();
        assert_eq!(t.active, vec![false, false, false, true, true, true]);
        assert_eq!(&t.values[3..], &[3.0, 4.0, 0.0]);
    }

    #[test]
    fn zero_mass_below_floor_falls_back() {
        let g = grid();
        // all mass at the top: nothing below the floor
        let top = BidCdf::point_mass(6, 5);
        let r = expected_revenue_full_censored(&g, &top, &top, 3);
        // treated as both bids in the lowest bin (value 0)
        assert_eq!(r, vec![0.0; 6]);
        let h = expected_revenue_half_censored(&g, &top, u(4), 3);
        assert_eq!(h, vec![0.0, 1.0, 2.0, 3.0, 4.0, 0.0]);
        assert!(r.iter().chain(&h).all(|v| v.is_finite()));
    }

    #[test]
    fn censor_level_zero() {
        let g = grid();
        let c = BidCdf::from_pmf(&[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(expected_revenue_full_censored(&g, &c, &c, 0), vec![0.0; 6]);
        assert_eq!(
            expected_revenue_half_censored(&g, &c, u(2), 0),
            vec![0.0, 1.0, 2.0, 0.0, 0.0, 0.0]
        );
    }
}
