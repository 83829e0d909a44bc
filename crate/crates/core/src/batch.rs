//! Offline alternating least squares over a whole event set.
//!
//! Used to warm-start the online model and as the reference the online
//! recursions are checked against. Solves go through nalgebra's Cholesky,
//! independently of the online path's hand-rolled kernels.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{elapsed_secs, Timestamp};
use crate::error::{Error, Result};
use crate::factors::{gamma_pow, FactorBlock};
use crate::params::{FactorPrior, RevenueHyper};
use crate::revenue::{BiasState, RevenueModel};

/// One training observation: a full K-vector of simulated revenues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingEvent {
    pub user: String,
    pub placement: String,
    pub timestamp: Timestamp,
    pub revenue: Vec<f64>,
}

struct Index {
    users: Vec<String>,
    placements: Vec<String>,
    user_of: Vec<usize>,
    placement_of: Vec<usize>,
    by_user: Vec<Vec<usize>>,
    by_placement: Vec<Vec<usize>>,
}

impl Index {
    fn new(events: &[TrainingEvent]) -> Self {
        let mut user_ids = BTreeMap::new();
        let mut placement_ids = BTreeMap::new();
        for e in events {
            let n = user_ids.len();
            user_ids.entry(e.user.clone()).or_insert(n);
            let n = placement_ids.len();
            placement_ids.entry(e.placement.clone()).or_insert(n);
        }
        let mut users = vec![String::new(); user_ids.len()];
        for (id, &i) in &user_ids {
            users[i] = id.clone();
        }
        let mut placements = vec![String::new(); placement_ids.len()];
        for (id, &i) in &placement_ids {
            placements[i] = id.clone();
        }
        let user_of: Vec<usize> = events.iter().map(|e| user_ids[&e.user]).collect();
        let placement_of: Vec<usize> = events.iter().map(|e| placement_ids[&e.placement]).collect();
        let mut by_user = vec![Vec::new(); users.len()];
        let mut by_placement = vec![Vec::new(); placements.len()];
        for (a, (&u, &p)) in user_of.iter().zip(&placement_of).enumerate() {
            by_user[u].push(a);
            by_placement[p].push(a);
        }
        Index {
            users,
            placements,
            user_of,
            placement_of,
            by_user,
            by_placement,
        }
    }
}

/// Current batch estimates for one level.
#[derive(Debug, Clone)]
pub struct LevelFit {
    pub user_factors: Vec<DVector<f64>>,
    pub placement_factors: Vec<DVector<f64>>,
    pub beta: f64,
}

fn prior_parts(prior: &FactorPrior) -> (DVector<f64>, DMatrix<f64>) {
    let l = prior.dim();
    (
        DVector::from_column_slice(&prior.mean),
        DMatrix::from_row_slice(l, l, &prior.precision),
    )
}

/// Minimises `Σ_a w_a (R_a − β − x_u'y_p)^2 + Σ_u ‖x_u − X0‖²_P + … ` for one
/// side given the other.
fn solve_block(
    members: &[usize],
    other: &[DVector<f64>],
    other_of: &[usize],
    weights: &[f64],
    residual: impl Fn(usize) -> f64,
    mean: &DVector<f64>,
    precision: &DMatrix<f64>,
) -> DVector<f64> {
    let mut a = precision.clone();
    let mut b = DVector::zeros(mean.len());
    for &e in members {
        let v = &other[other_of[e]];
        a += weights[e] * v * v.transpose();
        b += weights[e] * (residual(e) - mean.dot(v)) * v;
    }
    let chol = a
        .cholesky()
        .expect("prior precision keeps the normal equations SPD");
    mean + chol.solve(&b)
}

struct Weights {
    user: Vec<f64>,
    placement: Vec<f64>,
    bias: Vec<f64>,
}

fn weights(events: &[TrainingEvent], hyper: &RevenueHyper, horizon: Timestamp) -> Weights {
    let w = |g: f64| -> Vec<f64> {
        events
            .iter()
            .map(|e| gamma_pow(g, elapsed_secs(e.timestamp, horizon)))
            .collect()
    };
    Weights {
        user: w(hyper.forgetting.user),
        placement: w(hyper.forgetting.placement),
        bias: w(hyper.forgetting.bias),
    }
}

/// Regularised, time-weighted loss of a level fit, weighted with the user
/// forgetting factor. Exact objective when forgetting is uniform.
pub fn level_loss(events: &[TrainingEvent], hyper: &RevenueHyper, k: usize, fit: &LevelFit) -> f64 {
    let idx = Index::new(events);
    let horizon = events.iter().map(|e| e.timestamp).max().unwrap_or(0);
    let w = weights(events, hyper, horizon).user;
    let (x0, pu) = prior_parts(&hyper.user_prior);
    let (y0, pp) = prior_parts(&hyper.placement_prior);
    let mut loss = 0.0;
    for (a, e) in events.iter().enumerate() {
        let pred = fit.beta
            + fit.user_factors[idx.user_of[a]].dot(&fit.placement_factors[idx.placement_of[a]]);
        loss += w[a] * (e.revenue[k] - pred).powi(2);
    }
    for x in &fit.user_factors {
        let d = x - &x0;
        loss += (d.transpose() * &pu * &d)[0];
    }
    for y in &fit.placement_factors {
        let d = y - &y0;
        loss += (d.transpose() * &pp * &d)[0];
    }
    loss + hyper.bias_precision * (fit.beta - hyper.bias_prior_mean).powi(2)
}

/// Runs `iterations` full ALS sweeps per level, calling `observe` with the
/// fit after every sweep.
pub fn batch_fit_with(
    events: &[TrainingEvent],
    levels: usize,
    hyper: &RevenueHyper,
    iterations: usize,
    seed: u64,
    mut observe: impl FnMut(usize, &LevelFit),
) -> Result<RevenueModel> {
    if events.is_empty() {
        return Err(Error::InvalidConfig(
            "batch fit needs at least one event".into(),
        ));
    }
    if hyper.features.is_some() {
        return Err(Error::InvalidConfig(
            "batch fit does not support contextual features".into(),
        ));
    }
    if let Some(e) = events.iter().find(|e| e.revenue.len() != levels) {
        return Err(Error::Dimension {
            what: "revenue vector",
            expected: levels,
            got: e.revenue.len(),
        });
    }
    let mut model = RevenueModel::new(levels, hyper.clone(), seed)?;
    let idx = Index::new(events);
    let horizon = events.iter().map(|e| e.timestamp).max().expect("non-empty");
    let w = weights(events, hyper, horizon);
    let (x0, pu) = prior_parts(&hyper.user_prior);
    let (y0, pp) = prior_parts(&hyper.placement_prior);
    let l = hyper.latent_dim;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut user_blocks: Vec<FactorBlock> = idx
        .users
        .iter()
        .map(|_| FactorBlock::new(levels, &hyper.user_prior, hyper.init_noise_stddev, &mut rng))
        .collect();
    let mut placement_blocks: Vec<FactorBlock> = idx
        .placements
        .iter()
        .map(|_| {
            FactorBlock::new(
                levels,
                &hyper.placement_prior,
                hyper.init_noise_stddev,
                &mut rng,
            )
        })
        .collect();
    let mut bias = vec![BiasState::default(); levels];

    for k in 0..levels {
        let mut fit = LevelFit {
            user_factors: user_blocks
                .iter()
                .map(|b| DVector::from_column_slice(b.factors(k)))
                .collect(),
            placement_factors: placement_blocks
                .iter()
                .map(|b| DVector::from_column_slice(b.factors(k)))
                .collect(),
            beta: hyper.bias_prior_mean,
        };
        let r = |a: usize| events[a].revenue[k];
        for _ in 0..iterations {
            for (u, members) in idx.by_user.iter().enumerate() {
                let beta = fit.beta;
                fit.user_factors[u] = solve_block(
                    members,
                    &fit.placement_factors,
                    &idx.placement_of,
                    &w.user,
                    |a| r(a) - beta,
                    &x0,
                    &pu,
                );
            }
            for (p, members) in idx.by_placement.iter().enumerate() {
                let beta = fit.beta;
                fit.placement_factors[p] = solve_block(
                    members,
                    &fit.user_factors,
                    &idx.user_of,
                    &w.placement,
                    |a| r(a) - beta,
                    &y0,
                    &pp,
                );
            }
            let (mut num, mut den) = (0.0, hyper.bias_precision);
            for a in 0..events.len() {
                let xy = fit.user_factors[idx.user_of[a]]
                    .dot(&fit.placement_factors[idx.placement_of[a]]);
                num += w.bias[a] * (r(a) - xy - hyper.bias_prior_mean);
                den += w.bias[a];
            }
            fit.beta = hyper.bias_prior_mean + num / den;
            observe(k, &fit);
        }

        // accumulators consistent with the final estimates
        for (u, members) in idx.by_user.iter().enumerate() {
            let block = &mut user_blocks[u];
            block
                .factors_mut(k)
                .copy_from_slice(fit.user_factors[u].as_slice());
            for &a in members {
                let y = &fit.placement_factors[idx.placement_of[a]];
                accumulate(block, k, l, w.user[a], y, r(a) - fit.beta - x0.dot(y));
            }
            block.set_last_update(k, horizon);
        }
        for (p, members) in idx.by_placement.iter().enumerate() {
            let block = &mut placement_blocks[p];
            block
                .factors_mut(k)
                .copy_from_slice(fit.placement_factors[p].as_slice());
            for &a in members {
                let x = &fit.user_factors[idx.user_of[a]];
                accumulate(block, k, l, w.placement[a], x, r(a) - fit.beta - y0.dot(x));
            }
            block.set_last_update(k, horizon);
        }
        let b = &mut bias[k];
        b.beta = fit.beta;
        for a in 0..events.len() {
            let xy =
                fit.user_factors[idx.user_of[a]].dot(&fit.placement_factors[idx.placement_of[a]]);
            b.cov += w.bias[a];
            b.obs += w.bias[a] * (r(a) - xy - hyper.bias_prior_mean);
        }
        b.last_update = Some(horizon);
    }

    model.install(
        idx.users.into_iter().zip(user_blocks).collect(),
        idx.placements.into_iter().zip(placement_blocks).collect(),
        bias,
    );
    Ok(model)
}

fn accumulate(block: &mut FactorBlock, k: usize, l: usize, w: f64, v: &DVector<f64>, resid: f64) {
    let cov = block.cov_mut(k);
    for i in 0..l {
        for j in 0..l {
            cov[i * l + j] += w * v[i] * v[j];
        }
    }
    for (o, vi) in block.obs_mut(k).iter_mut().zip(v.iter()) {
        *o += w * resid * vi;
    }
}

/// Offline ALS over all users, placements and levels.
pub fn batch_fit(
    events: &[TrainingEvent],
    levels: usize,
    hyper: &RevenueHyper,
    iterations: usize,
    seed: u64,
) -> Result<RevenueModel> {
    batch_fit_with(events, levels, hyper, iterations, seed, |_, _| {})
}
