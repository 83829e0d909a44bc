//! Brute-force expected revenue under censorship: enumeration over every
//! pair of bid bins, for checking the closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reserve_core::censorship::{
    expected_revenue_full_censored, expected_revenue_half_censored, simulate_revenue_vector,
};
use reserve_core::{BidCdf, FloorGrid, Micros};

/// A bid outcome: `None` is below the lowest level, `Some(j)` is bin `j`
/// valued at its lower edge.
type Bin = Option<usize>;

/// Below-grid mass and bin probabilities.
pub type Dist = (f64, Vec<f64>);

fn support(k: usize) -> Vec<Bin> {
    std::iter::once(None).chain((0..k).map(Some)).collect()
}

fn prob(d: &Dist, b: Bin) -> f64 {
    match b {
        None => d.0,
        Some(j) => d.1[j],
    }
}

/// Revenue at floor `f` decomposed into the second bid's excess over the
/// floor plus the floor when the first bid clears it. Equal to
/// `max(f, b2) 1{f <= b1}` whenever `b2 <= b1`.
fn decomposed(grid: &FloorGrid, k: usize, b1: Bin, b2: Bin) -> f64 {
    let f = grid.value(k);
    let clears = b1.is_some_and(|j| j >= k);
    let excess = b2.map_or(0.0, |j| if j > k { grid.value(j) - f } else { 0.0 });
    excess + if clears { f } else { 0.0 }
}

fn below_floor(b: Bin, a: usize) -> bool {
    b.is_none_or(|j| j < a)
}

pub fn brute_full(grid: &FloorGrid, d1: &Dist, d2: &Dist, a: usize) -> Vec<f64> {
    let k = grid.len();
    let mut out = vec![0.0; k];
    let mut norm = 0.0;
    for b1 in support(k) {
        for b2 in support(k) {
            if !below_floor(b1, a) || !below_floor(b2, a) {
                continue;
            }
            let p = prob(d1, b1) * prob(d2, b2);
            norm += p;
            for (kk, o) in out.iter_mut().enumerate() {
                *o += p * decomposed(grid, kk, b1, b2);
            }
        }
    }
    out.iter().map(|v| v / norm).collect()
}

pub fn brute_half(grid: &FloorGrid, b1: usize, d2: &Dist, a: usize) -> Vec<f64> {
    let k = grid.len();
    let mut out = vec![0.0; k];
    let mut norm = 0.0;
    for b2 in support(k) {
        if !below_floor(b2, a) {
            continue;
        }
        let p = prob(d2, b2);
        norm += p;
        for (kk, o) in out.iter_mut().enumerate() {
            *o += p * decomposed(grid, kk, Some(b1), b2);
        }
    }
    out.iter().map(|v| v / norm).collect()
}

fn mass_below(d: &Dist, a: usize) -> f64 {
    d.0 + d.1[..a].iter().sum::<f64>()
}

/// Largest of `|got - want| / (1 + |want|)`.
pub fn max_error(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / (1.0 + w.abs()))
        .fold(0.0, f64::max)
}

/// Draws `cases` random grids with `K <= 12`, random pairs of bid
/// distributions and censor points, and returns the largest error of the
/// full- and half-censored closed forms against enumeration.
pub fn random_pairs_error(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < cases {
        let k = rng.random_range(2..=12);
        let grid = super::random_grid(&mut rng, k);
        let d1 = super::random_pmf(&mut rng, k);
        let d2 = super::random_pmf(&mut rng, k);
        let (c1, c2) = (super::cdf_of(d1.0, &d1.1), super::cdf_of(d2.0, &d2.1));
        let a = rng.random_range(1..=k);
        if mass_below(&d1, a) == 0.0 || mass_below(&d2, a) == 0.0 {
            continue;
        }
        let got = expected_revenue_full_censored(&grid, &c1, &c2, a);
        worst = worst.max(max_error(&got, &brute_full(&grid, &d1, &d2, a)));
        let b1 = rng.random_range(a.min(k - 1)..k);
        let got = expected_revenue_half_censored(&grid, &c2, grid.level(b1), a);
        worst = worst.max(max_error(&got, &brute_half(&grid, b1, &d2, a)));
        checked += 1;
    }
    worst
}

/// Point-mass bid distributions against the revenue rule for every
/// admissible (censor level, b1, b2) on a 12-level grid. Returns the number
/// of cases and the number that were not bit-identical.
pub fn point_mass_mismatches() -> (usize, usize) {
    let k = 12;
    let grid = FloorGrid::new(
        (0..k as i64)
            .map(|v| Micros(v * 250_000 + v * v * 10_000))
            .collect(),
    )
    .unwrap();
    let (mut cases, mut mismatches) = (0, 0);
    for a in 1..=k {
        for j1 in 0..k {
            for j2 in 0..=j1 {
                let (m1, m2) = (BidCdf::point_mass(k, j1), BidCdf::point_mass(k, j2));
                let want = simulate_revenue_vector(&grid, grid.level(j1), grid.level(j2));
                let got = if j1 < a {
                    expected_revenue_full_censored(&grid, &m1, &m2, a)
                } else if j2 < a {
                    expected_revenue_half_censored(&grid, &m2, grid.level(j1), a)
                } else {
                    continue;
                };
                cases += 1;
                if got != want {
                    mismatches += 1;
                }
            }
        }
    }
    (cases, mismatches)
}
