//! Revenue profile model: per level `k`,
//! `R^(k) = β^(k) + X_u^(k)' Y_p^(k) + θ' Z^(k)`, estimated online by
//! time-weighted alternating least squares.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Timestamp;
use crate::error::{Error, Result};
use crate::factors::{decay_factor, fold_side, gamma_pow, EntityMap, FactorBlock, SolveScratch};
use crate::linalg;
use crate::params::{FactorPrior, RevenueHyper};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BiasState {
    pub beta: f64,
    pub cov: f64,
    pub obs: f64,
    pub last_update: Option<Timestamp>,
}

/// K expected-revenue values, one per floor level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueProfile {
    pub expected_revenue: Vec<f64>,
}

impl RevenueProfile {
    /// Index of the largest value; ties go to the lowest level.
    pub fn argmax(&self) -> usize {
        argmax_lowest(&self.expected_revenue)
    }
}

/// Argmax with ties broken toward the lowest index. NaN never wins.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || values[best].is_nan() {
            best = k;
        }
    }
    best
}

/// Which accumulator block an explicit decay applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity<'a> {
    User(&'a str),
    Placement(&'a str),
    Bias,
}

/// Saved pre-update state of the blocks one event touches.
#[derive(Debug, Clone)]
pub struct RevenueUndo {
    user_id: String,
    placement_id: String,
    user: Option<(FactorBlock, u64)>,
    placement: Option<(FactorBlock, u64)>,
    bias: Vec<BiasState>,
    features: Option<FactorBlock>,
    rng: ChaCha8Rng,
    clocks: (u64, u64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RevenueModel {
    levels: usize,
    hyper: RevenueHyper,
    users: EntityMap<FactorBlock>,
    placements: EntityMap<FactorBlock>,
    bias: Vec<BiasState>,
    features: Option<FactorBlock>,
    rng: ChaCha8Rng,
}

impl PartialEq for RevenueModel {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
            && self.hyper == other.hyper
            && self.users == other.users
            && self.placements == other.placements
            && self.bias == other.bias
            && self.features == other.features
            && self.rng == other.rng
    }
}

impl RevenueModel {
    pub fn new(levels: usize, hyper: RevenueHyper, seed: u64) -> Result<Self> {
        hyper.validate()?;
        if levels < 2 {
            return Err(Error::InvalidConfig(
                "revenue model needs at least 2 levels".into(),
            ));
        }
        let bias = vec![
            BiasState {
                beta: hyper.bias_prior_mean,
                ..Default::default()
            };
            levels
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features = hyper
            .features
            .as_ref()
            .map(|f| FactorBlock::new(levels, &f.prior, 0.0, &mut rng));
        Ok(RevenueModel {
            levels,
            hyper,
            users: EntityMap::default(),
            placements: EntityMap::default(),
            bias,
            features,
            rng,
        })
    }

    /// Bounds the number of stored users and placements; the least recently
    /// updated are reset to the prior when the bound is exceeded.
    pub fn with_capacity(mut self, users: Option<usize>, placements: Option<usize>) -> Self {
        self.users = EntityMap::with_capacity_bound(users);
        self.placements = EntityMap::with_capacity_bound(placements);
        self
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn hyper(&self) -> &RevenueHyper {
        &self.hyper
    }

    pub fn users(&self) -> &EntityMap<FactorBlock> {
        &self.users
    }

    pub fn placements(&self) -> &EntityMap<FactorBlock> {
        &self.placements
    }

    pub fn bias(&self) -> &[BiasState] {
        &self.bias
    }

    pub fn feature_weights(&self) -> Option<&FactorBlock> {
        self.features.as_ref()
    }

    fn user_factors<'a>(&'a self, user: &str, k: usize) -> &'a [f64] {
        match self.users.get(user) {
            Some(b) => b.factors(k),
            None => &self.hyper.user_prior.mean,
        }
    }

    fn placement_factors<'a>(&'a self, placement: &str, k: usize) -> &'a [f64] {
        match self.placements.get(placement) {
            Some(b) => b.factors(k),
            None => &self.hyper.placement_prior.mean,
        }
    }

    fn check_features(&self, features: Option<&[f64]>) -> Result<()> {
        let expected = self.hyper.feature_dim();
        let got = features.map_or(0, |f| f.len());
        if expected != got {
            return Err(Error::Dimension {
                what: "feature vector",
                expected,
                got,
            });
        }
        if features.is_some_and(|f| f.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidConfig("feature values must be finite".into()));
        }
        Ok(())
    }

    fn feature_term(&self, k: usize, features: Option<&[f64]>) -> f64 {
        match (&self.features, features) {
            (Some(z), Some(theta)) => linalg::dot(z.factors(k), theta),
            _ => 0.0,
        }
    }

    /// Expected revenue at every level. Unknown ids use prior-mean factors.
    pub fn predict_profile(
        &self,
        user: &str,
        placement: &str,
        features: Option<&[f64]>,
    ) -> Result<RevenueProfile> {
        self.check_features(features)?;
        let expected_revenue = (0..self.levels)
            .map(|k| {
                self.bias[k].beta
                    + linalg::dot(
                        self.user_factors(user, k),
                        self.placement_factors(placement, k),
                    )
                    + self.feature_term(k, features)
            })
            .collect();
        Ok(RevenueProfile { expected_revenue })
    }

    /// Per-level uncertainty bonus `sqrt(y' A_u^{-1} y) + sqrt(x' B_p^{-1} x)`
    /// where `A_u`, `B_p` are the accumulators decayed to `ts` plus the prior
    /// precision.
    pub fn uncertainty(&self, user: &str, placement: &str, ts: Timestamp) -> Vec<f64> {
        let l = self.hyper.latent_dim;
        let mut a = vec![0.0; l * l];
        let mut scratch = vec![0.0; l * l + l];
        let user_block = self.users.get(user);
        let placement_block = self.placements.get(placement);
        (0..self.levels)
            .map(|k| {
                let x = self.user_factors(user, k);
                let y = self.placement_factors(placement, k);
                let mut bonus = 0.0;
                for (block, prior, gamma, v) in [
                    (
                        user_block,
                        &self.hyper.user_prior,
                        self.hyper.forgetting.user,
                        y,
                    ),
                    (
                        placement_block,
                        &self.hyper.placement_prior,
                        self.hyper.forgetting.placement,
                        x,
                    ),
                ] {
                    a.copy_from_slice(&prior.precision);
                    if let Some(b) = block {
                        let s = b.state(k);
                        let g = match s.last_update {
                            Some(last) if ts > last => {
                                gamma_pow(gamma, crate::domain::elapsed_secs(last, ts))
                            }
                            _ => 1.0,
                        };
                        for (ai, ci) in a.iter_mut().zip(s.cov) {
                            *ai += g * ci;
                        }
                    }
                    bonus += linalg::inverse_quadratic_form(&a, v, l, &mut scratch)
                        .map_or(0.0, |q| q.max(0.0).sqrt());
                }
                bonus
            })
            .collect()
    }

    /// Online update with a full K-vector of simulated revenues.
    pub fn update(
        &mut self,
        user: &str,
        placement: &str,
        ts: Timestamp,
        revenue: &[f64],
        features: Option<&[f64]>,
    ) -> Result<()> {
        let active = vec![true; self.levels];
        self.update_levels(user, placement, ts, revenue, &active, features)
    }

    /// Online update restricted to `active` levels. Inactive levels are left
    /// bit-identical: no decay, no new observation, no clock advance.
    pub fn update_levels(
        &mut self,
        user: &str,
        placement: &str,
        ts: Timestamp,
        revenue: &[f64],
        active: &[bool],
        features: Option<&[f64]>,
    ) -> Result<()> {
        let decays = self.validate_update(user, placement, ts, revenue, active, features)?;
        self.apply_update(user, placement, ts, revenue, active, features, &decays);
        Ok(())
    }

    /// Per-level decay factors (user, placement, bias, features) for an
    /// update at `ts`, or the reason the update would be rejected.
    fn validate_update(
        &self,
        user: &str,
        placement: &str,
        ts: Timestamp,
        revenue: &[f64],
        active: &[bool],
        features: Option<&[f64]>,
    ) -> Result<Vec<[f64; 4]>> {
        if revenue.len() != self.levels {
            return Err(Error::Dimension {
                what: "revenue vector",
                expected: self.levels,
                got: revenue.len(),
            });
        }
        if active.len() != self.levels {
            return Err(Error::Dimension {
                what: "level mask",
                expected: self.levels,
                got: active.len(),
            });
        }
        if revenue
            .iter()
            .zip(active)
            .any(|(r, &a)| a && !r.is_finite())
        {
            return Err(Error::InvalidEvent("revenue target must be finite".into()));
        }
        self.check_features(features)?;
        let h = &self.hyper;
        let policy = h.timestamp_policy;
        let user_block = self.users.get(user);
        let placement_block = self.placements.get(placement);
        let mut decays = vec![[1.0; 4]; self.levels];
        for k in (0..self.levels).filter(|&k| active[k]) {
            let mut d = [1.0; 4];
            if let Some(b) = user_block {
                d[0] = b.decay_factor(k, ts, h.forgetting.user, policy, user)?;
            }
            if let Some(b) = placement_block {
                d[1] = b.decay_factor(k, ts, h.forgetting.placement, policy, placement)?;
            }
            d[2] = decay_factor(
                self.bias[k].last_update,
                ts,
                h.forgetting.bias,
                policy,
                "bias",
            )?;
            if let (Some(z), Some(f)) = (&self.features, &h.features) {
                d[3] = z.decay_factor(k, ts, f.forgetting, policy, "features")?;
            }
            decays[k] = d;
        }
        Ok(decays)
    }

    #[allow(clippy::too_many_arguments)]
    fn apply_update(
        &mut self,
        user: &str,
        placement: &str,
        ts: Timestamp,
        revenue: &[f64],
        active: &[bool],
        features: Option<&[f64]>,
        decays: &[[f64; 4]],
    ) {
        let h = &self.hyper;
        let noise = h.init_noise_stddev;
        let mut ublock = match self.users.take(user) {
            Some((b, _)) => b,
            None => FactorBlock::new(self.levels, &h.user_prior, noise, &mut self.rng),
        };
        let mut pblock = match self.placements.take(placement) {
            Some((b, _)) => b,
            None => FactorBlock::new(self.levels, &h.placement_prior, noise, &mut self.rng),
        };
        let l = h.latent_dim;
        let mut scratch = SolveScratch::new(l);
        let mut zscratch = SolveScratch::new(h.feature_dim().max(1));
        let mut x = vec![0.0; l];
        let mut y = vec![0.0; l];
        let mut z = vec![0.0; h.feature_dim()];
        for k in (0..self.levels).filter(|&k| active[k]) {
            let [du, dp, db, dz] = decays[k];
            let r = revenue[k];
            x.copy_from_slice(ublock.factors(k));
            y.copy_from_slice(pblock.factors(k));
            let bias = &mut self.bias[k];
            let mut beta = bias.beta;
            if let Some(zb) = &self.features {
                z.copy_from_slice(zb.factors(k));
            }
            let theta_z = |z: &[f64]| features.map_or(0.0, |t| linalg::dot(t, z));
            for _ in 0..h.iterations {
                let offset = beta + theta_z(&z);
                let us = ublock.state(k);
                scratch.solve_side(&mut x, &h.user_prior, du, us.cov, us.obs, &y, r - offset);
                let ps = pblock.state(k);
                scratch.solve_side(
                    &mut y,
                    &h.placement_prior,
                    dp,
                    ps.cov,
                    ps.obs,
                    &x,
                    r - offset,
                );
                let xy = linalg::dot(&x, &y);
                beta = h.bias_prior_mean
                    + (db * bias.obs + (r - xy - theta_z(&z) - h.bias_prior_mean))
                        / (db * bias.cov + 1.0 + h.bias_precision);
                if let (Some(zb), Some(fp), Some(theta)) = (&self.features, &h.features, features) {
                    let zs = zb.state(k);
                    zscratch.solve_side(
                        &mut z,
                        &fp.prior,
                        dz,
                        zs.cov,
                        zs.obs,
                        theta,
                        r - beta - xy,
                    );
                }
            }
            let offset = beta + theta_z(&z);
            let xy = linalg::dot(&x, &y);
            fold_side(&mut ublock, k, du, &h.user_prior.mean, &y, r - offset, ts);
            fold_side(
                &mut pblock,
                k,
                dp,
                &h.placement_prior.mean,
                &x,
                r - offset,
                ts,
            );
            ublock.factors_mut(k).copy_from_slice(&x);
            pblock.factors_mut(k).copy_from_slice(&y);
            bias.cov = db * bias.cov + 1.0;
            bias.obs = db * bias.obs + (r - xy - theta_z(&z) - h.bias_prior_mean);
            bias.beta = beta;
            bias.last_update = Some(ts);
            if let (Some(zb), Some(fp), Some(theta)) = (&mut self.features, &h.features, features) {
                fold_side(zb, k, dz, &fp.prior.mean, theta, r - beta - xy, ts);
                zb.factors_mut(k).copy_from_slice(&z);
            }
        }
        self.users.put(user, ublock);
        self.placements.put(placement, pblock);
    }

    /// Multiplies an entity's accumulators by `γ^Δt` and advances its clock.
    pub fn decay_only(&mut self, entity: Entity<'_>, ts: Timestamp) -> Result<()> {
        let f = self.hyper.forgetting;
        match entity {
            Entity::User(id) => match self.users.take(id) {
                Some((mut b, touched)) => {
                    let res = b.decay_to(ts, f.user);
                    self.users.restore(id, Some((b, touched)));
                    res
                }
                None => Ok(()),
            },
            Entity::Placement(id) => match self.placements.take(id) {
                Some((mut b, touched)) => {
                    let res = b.decay_to(ts, f.placement);
                    self.placements.restore(id, Some((b, touched)));
                    res
                }
                None => Ok(()),
            },
            Entity::Bias => {
                if let Some(last) = self.bias.iter().filter_map(|b| b.last_update).max() {
                    if ts < last {
                        return Err(Error::OutOfOrder {
                            entity: "bias".into(),
                            timestamp: ts,
                            last_update: last,
                        });
                    }
                }
                for b in self.bias.iter_mut() {
                    if let Some(last) = b.last_update {
                        let g = gamma_pow(f.bias, crate::domain::elapsed_secs(last, ts));
                        b.cov *= g;
                        b.obs *= g;
                        b.last_update = Some(ts);
                    }
                }
                Ok(())
            }
        }
    }

    /// Applies the capacity bound. Returns (evicted users, evicted placements).
    pub fn evict_excess(&mut self) -> (Vec<String>, Vec<String>) {
        (self.users.evict_excess(), self.placements.evict_excess())
    }

    pub fn snapshot(&self, user: &str, placement: &str) -> RevenueUndo {
        RevenueUndo {
            user_id: user.to_string(),
            placement_id: placement.to_string(),
            user: self.users.clone_entry(user),
            placement: self.placements.clone_entry(placement),
            bias: self.bias.clone(),
            features: self.features.clone(),
            rng: self.rng.clone(),
            clocks: (self.users.clock(), self.placements.clock()),
        }
    }

    pub fn restore(&mut self, undo: RevenueUndo) {
        self.users.restore(&undo.user_id, undo.user);
        self.placements.restore(&undo.placement_id, undo.placement);
        self.users.set_clock(undo.clocks.0);
        self.placements.set_clock(undo.clocks.1);
        self.bias = undo.bias;
        self.features = undo.features;
        self.rng = undo.rng;
    }

    pub(crate) fn install(
        &mut self,
        users: Vec<(String, FactorBlock)>,
        placements: Vec<(String, FactorBlock)>,
        bias: Vec<BiasState>,
    ) {
        for (id, b) in users {
            self.users.put(&id, b);
        }
        for (id, b) in placements {
            self.placements.put(&id, b);
        }
        self.bias = bias;
    }

    pub fn user_prior(&self) -> &FactorPrior {
        &self.hyper.user_prior
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Forgetting, PINNED_PRECISION};

    fn plain_hyper(l: usize, precision: f64) -> RevenueHyper {
        RevenueHyper {
            latent_dim: l,
            forgetting: Forgetting::NONE,
            user_prior: FactorPrior::isotropic(l, 0.0, precision),
            placement_prior: FactorPrior::isotropic(l, 0.0, precision),
            bias_prior_mean: 0.0,
            bias_precision: precision,
            features: None,
            iterations: 2,
            init_noise_stddev: 0.0,
            timestamp_policy: Default::default(),
        }
    }

    #[test]
    fn fresh_profile_is_bias_prior() {
        let mut h = plain_hyper(2, 1.0);
        h.bias_prior_mean = 1.5;
        let m = RevenueModel::new(4, h, 0).unwrap();
        let p = m.predict_profile("u", "p", None).unwrap();
        assert_eq!(p.expected_revenue, vec![1.5; 4]);
    }

    #[test]
    fn prediction_is_bias_plus_dot() {
        let mut m = RevenueModel::new(3, plain_hyper(2, 1.0), 0).unwrap();
        m.update("u", "p", 0, &[1.0, 2.0, 3.0], None).unwrap();
        let p = m.predict_profile("u", "p", None).unwrap();
        for k in 0..3 {
            let x = m.users().get("u").unwrap().factors(k);
            let y = m.placements().get("p").unwrap().factors(k);
            let expected = m.bias()[k].beta + x[0] * y[0] + x[1] * y[1];
            assert_eq!(p.expected_revenue[k], expected);
        }
        assert_eq!(p, m.predict_profile("u", "p", None).unwrap());
    }

    #[test]
    fn tight_priors_stay_at_prior() {
        let mut m = RevenueModel::new(2, plain_hyper(2, 1e9), 0).unwrap();
        m.update("u", "p", 0, &[10.0, 20.0], None).unwrap();
        for k in 0..2 {
            assert!(m
                .users()
                .get("u")
                .unwrap()
                .factors(k)
                .iter()
                .all(|v| v.abs() < 1e-6));
            assert!(m.bias()[k].beta.abs() < 1e-6);
        }
    }

    #[test]
    fn vague_priors_track_weighted_mean() {
        // user and placement effects pinned, bias free: β tracks the time-weighted mean
        let mut h = plain_hyper(2, PINNED_PRECISION);
        h.bias_precision = 1e-9;
        h.forgetting = Forgetting::uniform(0.9);
        let mut m = RevenueModel::new(2, h, 0).unwrap();
        let obs = [(0, 4.0), (1_000, 2.0), (3_000, 1.0)];
        for (t, r) in obs {
            m.update("u", "p", t, &[r, r], None).unwrap();
        }
        let w: Vec<f64> = obs
            .iter()
            .map(|(t, _)| 0.9f64.powf((3_000 - t) as f64 / 1000.0))
            .collect();
        let mean = obs.iter().zip(&w).map(|((_, r), w)| r * w).sum::<f64>() / w.iter().sum::<f64>();
        let p = m.predict_profile("u", "p", None).unwrap();
        assert!(
            (p.expected_revenue[0] - mean).abs() < 1e-6,
            "{} vs {mean}",
            p.expected_revenue[0]
        );
    }

    #[test]
    fn out_of_order_rejected_without_mutation() {
        let mut m = RevenueModel::new(2, plain_hyper(2, 1.0), 0).unwrap();
        m.update("u", "p", 5_000, &[1.0, 1.0], None).unwrap();
        let before = m.clone();
        let err = m.update("u", "q", 4_000, &[1.0, 1.0], None).unwrap_err();
        assert!(matches!(err, Error::OutOfOrder { .. }));
        assert_eq!(m, before);
    }

    #[test]
    fn clamp_policy_accepts_out_of_order() {
        let mut h = plain_hyper(2, 1.0);
        h.timestamp_policy = crate::params::TimestampPolicy::Clamp;
        let mut m = RevenueModel::new(2, h, 0).unwrap();
        m.update("u", "p", 5_000, &[1.0, 1.0], None).unwrap();
        m.update("u", "p", 4_000, &[1.0, 1.0], None).unwrap();
        assert_eq!(m.users().get("u").unwrap().last_update(0), Some(4_000));
    }

    #[test]
    fn masked_levels_untouched() {
        let mut m = RevenueModel::new(3, plain_hyper(2, 1.0), 0).unwrap();
        m.update("u", "p", 0, &[1.0, 2.0, 3.0], None).unwrap();
        let before = m.clone();
        m.update_levels(
            "u",
            "p",
            1_000,
            &[9.0, 9.0, 9.0],
            &[false, true, true],
            None,
        )
        .unwrap();
        let (ub, ua) = (
            before.users().get("u").unwrap(),
            m.users().get("u").unwrap(),
        );
        assert_eq!(ub.state(0), ua.state(0));
        assert_eq!(before.bias()[0], m.bias()[0]);
        assert_ne!(ub.state(1), ua.state(1));
    }

    #[test]
    fn feature_dimension_checked() {
        let m = RevenueModel::new(2, plain_hyper(2, 1.0), 0).unwrap();
        assert!(m.predict_profile("u", "p", Some(&[1.0])).is_err());
        let mut h = plain_hyper(2, 1.0);
        h.features = Some(crate::params::FeaturePrior {
            prior: FactorPrior::isotropic(2, 0.0, 1e-6),
            forgetting: 1.0,
        });
        let mut m = RevenueModel::new(2, h, 0).unwrap();
        assert!(m.predict_profile("u", "p", None).is_err());
        assert!(m
            .update("u", "p", 0, &[1.0, 1.0], Some(&[1.0, 2.0, 3.0]))
            .is_err());
        m.update("u", "p", 0, &[1.0, 1.0], Some(&[1.0, 0.0]))
            .unwrap();
    }

    #[test]
    fn features_learn_additive_effect() {
        // user/placement effects pinned at zero; revenue = 1 + 2·θ
        let mut h = plain_hyper(2, PINNED_PRECISION);
        h.bias_precision = 1e-6;
        h.features = Some(crate::params::FeaturePrior {
            prior: FactorPrior::isotropic(1, 0.0, 1e-6),
            forgetting: 1.0,
        });
        h.iterations = 5;
        let mut m = RevenueModel::new(2, h, 0).unwrap();
        for i in 0..400 {
            let theta = (i % 7) as f64 / 7.0;
            let r = 1.0 + 2.0 * theta;
            m.update("u", "p", i, &[r, r], Some(&[theta])).unwrap();
        }
        let p = m.predict_profile("u", "p", Some(&[0.5])).unwrap();
        assert!((p.expected_revenue[0] - 2.0).abs() < 1e-2, "{:?}", p);
    }

    #[test]
    fn decay_only_scales_bias() {
        let mut h = plain_hyper(2, 1.0);
        h.forgetting = Forgetting::uniform(0.5);
        let mut m = RevenueModel::new(2, h, 0).unwrap();
        m.update("u", "p", 0, &[1.0, 1.0], None).unwrap();
        let before = m.bias()[0];
        m.decay_only(Entity::Bias, 2_000).unwrap();
        assert_eq!(m.bias()[0].cov, before.cov * 0.25);
        assert!(m.decay_only(Entity::Bias, 1_000).is_err());
        m.decay_only(Entity::User("nobody"), 0).unwrap();
    }

    #[test]
    fn snapshot_restore_is_exact() {
        let mut m = RevenueModel::new(3, RevenueHyper::default(), 4).unwrap();
        m.update("u", "p", 0, &[1.0, 2.0, 3.0], None).unwrap();
        let before = m.clone();
        let undo = m.snapshot("u2", "p");
        m.update("u2", "p", 10, &[3.0, 2.0, 1.0], None).unwrap();
        m.restore(undo);
        assert_eq!(m, before);
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax_lowest(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax_lowest(&[1.0, 5.0, 2.0]), 1);
        assert_eq!(argmax_lowest(&[1.0, 5.0, 5.0]), 1);
    }
}
