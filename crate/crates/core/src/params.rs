//! Hyper-parameter bundles for the revenue and bid models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Precision used to pin a latent component to its prior mean. This is how
/// per-user and per-placement biases are encoded inside the factor product.
pub const PINNED_PRECISION: f64 = 1e8;

/// Gaussian prior on a latent factor vector: mean and precision matrix
/// (row-major, L×L). The precision is added directly to the normal
/// equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorPrior {
    pub mean: Vec<f64>,
    pub precision: Vec<f64>,
}

impl FactorPrior {
    pub fn isotropic(dim: usize, mean: f64, precision: f64) -> Self {
        Self::diagonal(vec![mean; dim], vec![precision; dim])
    }

    pub fn diagonal(mean: Vec<f64>, diag: Vec<f64>) -> Self {
        let n = mean.len();
        assert_eq!(n, diag.len());
        let mut precision = vec![0.0; n * n];
        for (i, d) in diag.into_iter().enumerate() {
            precision[i * n + i] = d;
        }
        FactorPrior { mean, precision }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn validate(&self, dim: usize, what: &'static str) -> Result<()> {
        if self.mean.len() != dim {
            return Err(Error::Dimension {
                what,
                expected: dim,
                got: self.mean.len(),
            });
        }
        if self.mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "{what}: prior mean must be finite"
            )));
        }
        if !linalg::is_spd(&self.precision, dim) {
            return Err(Error::InvalidConfig(format!(
                "{what}: prior precision must be symmetric positive definite"
            )));
        }
        Ok(())
    }
}

/// Per-second forgetting factors γ. An observation `Δt` seconds old carries
/// weight `γ^Δt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forgetting {
    pub user: f64,
    pub placement: f64,
    pub bias: f64,
}

impl Forgetting {
    pub fn uniform(gamma: f64) -> Self {
        Forgetting {
            user: gamma,
            placement: gamma,
            bias: gamma,
        }
    }

    /// Builds factors from per-second decay rates `r`, with `γ = exp(-r)`.
    pub fn from_rates(user: f64, placement: f64) -> Self {
        Forgetting {
            user: (-user).exp(),
            placement: (-placement).exp(),
            bias: (-placement).exp(),
        }
    }

    pub const NONE: Forgetting = Forgetting {
        user: 1.0,
        placement: 1.0,
        bias: 1.0,
    };

    fn validate(&self, what: &str) -> Result<()> {
        for g in [self.user, self.placement, self.bias] {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{what}: forgetting factor {g} not in (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimestampPolicy {
    /// Out-of-order updates are rejected.
    #[default]
    Reject,
    /// Out-of-order updates are applied with `Δt = 0`.
    Clamp,
}

/// Prior on the contextual feature weights `Z^(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePrior {
    pub prior: FactorPrior,
    pub forgetting: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueHyper {
    pub latent_dim: usize,
    pub forgetting: Forgetting,
    pub user_prior: FactorPrior,
    pub placement_prior: FactorPrior,
    pub bias_prior_mean: f64,
    pub bias_precision: f64,
    #[serde(default)]
    pub features: Option<FeaturePrior>,
    pub iterations: usize,
    pub init_noise_stddev: f64,
    #[serde(default)]
    pub timestamp_policy: TimestampPolicy,
}

impl RevenueHyper {
    /// L-dimensional factors where component 0 carries the user bias
    /// (placement side pinned to 1) and component 1 the placement bias (user
    /// side pinned to 1). Remaining components are free latent factors.
    pub fn bias_encoded(latent_dim: usize, user_precision: f64, placement_precision: f64) -> Self {
        let (user_prior, placement_prior) =
            bias_encoded_priors(latent_dim, user_precision, placement_precision);
        RevenueHyper {
            latent_dim,
            forgetting: Forgetting::from_rates(1e-5, 1e-6),
            user_prior,
            placement_prior,
            bias_prior_mean: 0.0,
            bias_precision: 1e-2,
            features: None,
            iterations: 2,
            init_noise_stddev: 0.1f64.sqrt(),
            timestamp_policy: TimestampPolicy::Reject,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::InvalidConfig("latent dimension must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        self.forgetting.validate("revenue")?;
        self.user_prior
            .validate(self.latent_dim, "revenue user prior")?;
        self.placement_prior
            .validate(self.latent_dim, "revenue placement prior")?;
        if !(self.bias_precision > 0.0) || !self.bias_prior_mean.is_finite() {
            return Err(Error::InvalidConfig("bias precision must be > 0".into()));
        }
        if let Some(f) = &self.features {
            f.prior.validate(f.prior.dim(), "feature prior")?;
            if f.prior.dim() == 0 {
                return Err(Error::InvalidConfig(
                    "feature dimension must be >= 1".into(),
                ));
            }
            Forgetting::uniform(f.forgetting).validate("feature")?;
        }
        if !(self.init_noise_stddev >= 0.0) {
            return Err(Error::InvalidConfig(
                "init noise stddev must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.features.as_ref().map_or(0, |f| f.prior.dim())
    }
}

impl Default for RevenueHyper {
    fn default() -> Self {
        RevenueHyper::bias_encoded(2, 10.0, 1e-2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidHyper {
    pub latent_dim: usize,
    pub forgetting: Forgetting,
    pub user_prior: FactorPrior,
    pub placement_prior: FactorPrior,
    pub iterations: usize,
    /// Upper clamp for per-level hazards.
    pub max_hazard: f64,
    pub init_noise_stddev: f64,
    #[serde(default)]
    pub timestamp_policy: TimestampPolicy,
}

impl BidHyper {
    pub fn bias_encoded(latent_dim: usize, user_precision: f64, placement_precision: f64) -> Self {
        let (user_prior, placement_prior) =
            bias_encoded_priors(latent_dim, user_precision, placement_precision);
        BidHyper {
            latent_dim,
            forgetting: Forgetting::from_rates(1e-5, 1e-6),
            user_prior,
            placement_prior,
            iterations: 2,
            max_hazard: 20.0,
            init_noise_stddev: 0.0,
            timestamp_policy: TimestampPolicy::Reject,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.iterations == 0 {
            return Err(Error::InvalidConfig(
                "bid model: latent dim and iterations must be >= 1".into(),
            ));
        }
        self.forgetting.validate("bid")?;
        self.user_prior
            .validate(self.latent_dim, "bid user prior")?;
        self.placement_prior
            .validate(self.latent_dim, "bid placement prior")?;
        if !(self.max_hazard > 0.0) {
            return Err(Error::InvalidConfig("max hazard must be > 0".into()));
        }
        if !(self.init_noise_stddev >= 0.0) {
            return Err(Error::InvalidConfig(
                "init noise stddev must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

impl Default for BidHyper {
    fn default() -> Self {
        BidHyper::bias_encoded(2, 10.0, 1e-2)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HyperParams {
    pub revenue: RevenueHyper,
    pub bid: BidHyper,
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        self.revenue.validate()?;
        self.bid.validate()
    }
}

fn bias_encoded_priors(
    latent_dim: usize,
    user_precision: f64,
    placement_precision: f64,
) -> (FactorPrior, FactorPrior) {
    assert!(
        latent_dim >= 2,
        "bias encoding needs at least two latent components"
    );
    let mut user_mean = vec![0.0; latent_dim];
    let mut user_diag = vec![user_precision; latent_dim];
    let mut placement_mean = vec![0.0; latent_dim];
    let mut placement_diag = vec![placement_precision; latent_dim];
    // component 0: user bias, multiplied by a placement-side constant 1
    placement_mean[0] = 1.0;
    placement_diag[0] = PINNED_PRECISION;
    // component 1: placement bias, multiplied by a user-side constant 1
    user_mean[1] = 1.0;
    user_diag[1] = PINNED_PRECISION;
    (
        FactorPrior::diagonal(user_mean, user_diag),
        FactorPrior::diagonal(placement_mean, placement_diag),
    )
}
