#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use reserve_core::{AalenModel, BidCdf, BidHyper, BidObservation, FloorGrid, Micros};

pub struct Recovery {
    pub sup_error: f64,
    pub censored_fraction: f64,
}

/// Feeds `draws` log-normal bids to a fresh Aalen model, optionally
/// left-censored at random grid floors, and compares the estimated CDF with
/// an empirical CDF from an independent reference sample.
pub fn cdf_recovery(draws: usize, censor: bool, seed: u64) -> Recovery {
    let grid = FloorGrid::default();
    let k = grid.len();
    let mut model = AalenModel::new(k, BidHyper::default(), seed).unwrap();
    let value = LogNormal::new(0.0, 0.8).unwrap();
    let floor = LogNormal::new(-0.25, 0.8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = ["a", "b", "c", "d", "e"];
    let mut censored = 0usize;
    for i in 0..draws {
        let v = Micros::from_units(value.sample(&mut rng));
        let obs = if censor {
            let f = grid.level(grid.bin(Micros::from_units(floor.sample(&mut rng))));
            if v < f {
                censored += 1;
                BidObservation::Censored { at: f }
            } else {
                BidObservation::Observed(v)
            }
        } else {
            BidObservation::Observed(v)
        };
        let u = users[rng.random_range(0..users.len())];
        let p = users[rng.random_range(0..users.len())];
        model.aalen_update(&grid, u, p, i as i64, obs).unwrap();
    }
    let mut reference = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n_ref = 1_000_000;
    let mut counts = vec![0usize; k + 1];
    for _ in 0..n_ref {
        let v = Micros::from_units(value.sample(&mut reference));
        counts[grid.bin(v)] += 1;
    }
    let mut truth = vec![0.0; k];
    let mut acc = 0usize;
    for j in 0..k {
        truth[j] = acc as f64 / n_ref as f64;
        acc += counts[j];
    }
    let mut sup: f64 = 0.0;
    for u in users {
        for p in users {
            let est = model.estimate_cdf(u, p);
            for j in 0..k {
                sup = sup.max((est.cdf[j] - truth[j]).abs());
            }
        }
    }
    Recovery {
        sup_error: sup,
        censored_fraction: censored as f64 / draws as f64,
    }
}

/// Random grid of `k` levels starting at zero.
pub fn random_grid(rng: &mut impl Rng, k: usize) -> FloorGrid {
    let mut levels = vec![Micros::ZERO];
    let mut v = 0i64;
    for _ in 1..k {
        v += rng.random_range(1..2_000_000);
        levels.push(Micros(v));
    }
    FloorGrid::new(levels).unwrap()
}

/// Random bin probabilities over `k` bins plus a below-grid mass, returned
/// as (below, pmf). Some bins are zeroed to exercise sparse supports.
pub fn random_pmf(rng: &mut impl Rng, k: usize) -> (f64, Vec<f64>) {
    let mut w: Vec<f64> = (0..=k)
        .map(|_| {
            if rng.random_bool(0.25) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[1] = 1.0;
    }
    let s: f64 = w.iter().sum();
    let below = w[0] / s;
    (below, w[1..].iter().map(|x| x / s).collect())
}

/// `P(V < b_k)` from a below-grid mass and bin probabilities.
pub fn cdf_of(below: f64, pmf: &[f64]) -> BidCdf {
    let mut acc = below;
    let mut cdf = Vec::with_capacity(pmf.len());
    for &p in pmf {
        cdf.push(acc.min(1.0));
        acc += p;
    }
    BidCdf::from_cdf(cdf).unwrap()
}

/// Streams `events` random revenue vectors (10 users × 5 placements, K=8,
/// L=2) through an online model, recomputes every accumulator as an
/// explicitly time-weighted batch sum over the per-event estimates, and
/// returns the largest relative difference.
pub fn online_offline_gap(events: usize, seed: u64) -> f64 {
    use reserve_core::revenue::Entity;
    use reserve_core::RevenueModel;

    let k = 8;
    let mut hyper = reserve_core::RevenueHyper::default();
    hyper.forgetting = reserve_core::Forgetting {
        user: 0.995,
        placement: 0.999,
        bias: 0.998,
    };
    let mut model = RevenueModel::new(k, hyper.clone(), seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
    let placements: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();

    struct Seen {
        user: usize,
        placement: usize,
        ts: i64,
        revenue: Vec<f64>,
        x: Vec<Vec<f64>>,
        y: Vec<Vec<f64>>,
        beta: Vec<f64>,
    }
    let mut seen = Vec::with_capacity(events);
    let mut ts = 0i64;
    for _ in 0..events {
        ts += rng.random_range(0..3_000);
        let (u, p) = (
            rng.random_range(0..users.len()),
            rng.random_range(0..placements.len()),
        );
        let revenue: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 3.0).collect();
        model
            .update(&users[u], &placements[p], ts, &revenue, None)
            .unwrap();
        let ub = model.users().get(&users[u]).unwrap();
        let pb = model.placements().get(&placements[p]).unwrap();
        seen.push(Seen {
            user: u,
            placement: p,
            ts,
            x: (0..k).map(|j| ub.factors(j).to_vec()).collect(),
            y: (0..k).map(|j| pb.factors(j).to_vec()).collect(),
            beta: model.bias().iter().map(|b| b.beta).collect(),
            revenue,
        });
    }
    let end = ts + 10_000;
    for u in &users {
        model.decay_only(Entity::User(u), end).unwrap();
    }
    for p in &placements {
        model.decay_only(Entity::Placement(p), end).unwrap();
    }
    model.decay_only(Entity::Bias, end).unwrap();

    let weight = |gamma: f64, t: i64| gamma.powf((end - t) as f64 / 1000.0);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let rel = |got: &[f64], want: &[f64]| {
        let diff: f64 = got
            .iter()
            .zip(want)
            .map(|(g, w)| (g - w).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = want.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            diff
        } else {
            diff / norm
        }
    };
    let l = hyper.latent_dim;
    let mut worst: f64 = 0.0;
    for j in 0..k {
        // users and placements: Σ w v v' and Σ w (r - β - μ'v) v, v the other side
        for side in 0..2 {
            let (ids, count, gamma, mean) = if side == 0 {
                (
                    &users,
                    users.len(),
                    hyper.forgetting.user,
                    &hyper.user_prior.mean,
                )
            } else {
                (
                    &placements,
                    placements.len(),
                    hyper.forgetting.placement,
                    &hyper.placement_prior.mean,
                )
            };
            for e in 0..count {
                let mut cov = vec![0.0; l * l];
                let mut obs = vec![0.0; l];
                for s in &seen {
                    let (owner, v) = if side == 0 {
                        (s.user, &s.y[j])
                    } else {
                        (s.placement, &s.x[j])
                    };
                    if owner != e {
                        continue;
                    }
                    let w = weight(gamma, s.ts);
                    for a in 0..l {
                        for b in 0..l {
                            cov[a * l + b] += w * v[a] * v[b];
                        }
                        obs[a] += w * (s.revenue[j] - s.beta[j] - dot(mean, v)) * v[a];
                    }
                }
                let block = if side == 0 {
                    model.users().get(&ids[e])
                } else {
                    model.placements().get(&ids[e])
                };
                if let Some(block) = block {
                    let st = block.state(j);
                    worst = worst.max(rel(st.cov, &cov)).max(rel(st.obs, &obs));
                }
            }
        }
        let (mut bcov, mut bobs) = (0.0, 0.0);
        for s in &seen {
            let w = weight(hyper.forgetting.bias, s.ts);
            bcov += w;
            bobs += w * (s.revenue[j] - dot(&s.x[j], &s.y[j]) - hyper.bias_prior_mean);
        }
        let b = model.bias()[j];
        worst = worst
            .max(rel(&[b.cov], &[bcov]))
            .max(rel(&[b.obs], &[bobs]));
    }
    worst
}

/// A log of `n` auctions recorded by an M1 engine choosing floors on a
/// synthetic stream, so floors are on the default experiment grid.
pub fn recorded_log(
    n: usize,
    seed: u64,
) -> (reserve_core::EngineConfig, Vec<reserve_core::AuctionEvent>) {
    use reserve_core::simulation::{experiment_grid, generate_stream, StreamConfig};
    use reserve_core::{Engine, EngineConfig, HyperParams, Variant};
    let config = EngineConfig::new(Variant::M1, experiment_grid(), HyperParams::default(), seed);
    let stream = generate_stream(&StreamConfig {
        n_users: 300,
        n_placements: 20,
        n_auctions: n,
        seed,
        ..Default::default()
    })
    .unwrap();
    let mut engine = Engine::new(config.clone()).unwrap();
    let mut events = Vec::with_capacity(n);
    for a in &stream {
        let d = engine
            .choose_floor(&a.user, &a.placement, a.timestamp)
            .unwrap();
        let e = a.observe(d.floor);
        engine.process_outcome(&e).unwrap();
        events.push(e);
    }
    (config, events)
}

/// Replays `events` through `config` in one go, and again in pieces cut at
/// `cuts` with a checkpoint file written and loaded into a fresh engine at
/// every cut. Returns both final checkpoints.
pub fn split_replay(
    config: &reserve_core::EngineConfig,
    events: &[reserve_core::AuctionEvent],
    cuts: &[usize],
) -> (Vec<u8>, Vec<u8>) {
    use reserve_core::checkpoint;
    use reserve_core::jsonl::{write_log, LogReader, ParseMode};
    use reserve_core::replay::Replayer;
    use reserve_core::Engine;

    let dir = tempfile::tempdir().unwrap();
    let read = |events: &[reserve_core::AuctionEvent], after| {
        let mut text = Vec::new();
        write_log(&mut text, events).unwrap();
        LogReader::new(&text[..], ParseMode::Strict)
            .after(after)
            .map(|r| r.unwrap())
            .collect::<Vec<_>>()
    };

    let mut whole = Engine::new(config.clone()).unwrap();
    let mut r = Replayer::new(&mut whole, ParseMode::Strict);
    for (line, e) in read(events, None) {
        r.feed(line, &e).unwrap();
    }
    r.finish();

    let mut bounds = vec![0];
    bounds.extend_from_slice(cuts);
    bounds.push(events.len());
    let path = dir.path().join("state.ckpt");
    checkpoint::save(&path, &Engine::new(config.clone()).unwrap()).unwrap();
    for w in bounds.windows(2) {
        let mut engine = Engine::new(config.clone()).unwrap();
        checkpoint::load_into(&path, &mut engine).unwrap();
        let after = engine.last_update();
        let mut r = Replayer::new(&mut engine, ParseMode::Strict);
        for (line, e) in read(&events[w[0]..w[1]], after) {
            r.feed(line, &e).unwrap();
        }
        r.finish();
        checkpoint::save(&path, &engine).unwrap();
    }
    let pieces = std::fs::read(&path).unwrap();
    (checkpoint::encode(&whole).unwrap(), pieces)
}
