//! Block-level simulation of a PA-AMM against frictionless arbitrage.
//!
//! One block is: rebalance, one price-closing arbitrage trade on the active
//! reserves, and bookkeeping of the resulting gaps, LVR, log-liquidity and
//! tracking error. Prices come from a seeded GBM ([`gbm_path`]) or from a
//! historical series ([`replay_historical`]).

mod estimators;
mod pipeline;
mod replay;
mod rng;
mod stats;

pub use estimators::{
    coupling_time, liquidity_growth_rate_estimate, lvr_rate_estimate, predicted_liquidity_growth_rate,
    predicted_lvr_rate, predicted_second_moment, stationary_moments, stationary_path_rates, tracking_error_check,
    PathRates,
};
pub use pipeline::{gbm_path, seed_pool, simulate_path, step_block, BlockDriver};
pub use replay::{parse_price_csv, replay_historical, PriceObservation};
pub use rng::InnovationStream;
pub use stats::{BatchMeans, MomentEstimate, RateEstimate};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Burn-in used when none is given.
pub const DEFAULT_BURN_IN: usize = 10_000;

/// GBM parameters and horizon of one simulated path.
///
/// Log-price increments are i.i.d. `N(μΔt, σ²Δt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<F> {
    pub mu: F,
    pub sigma: F,
    pub dt: F,
    pub n_blocks: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl<F: Scalar> SimConfig<F> {
    pub fn new(mu: F, sigma: F, dt: F, n_blocks: usize, burn_in: usize, seed: u64) -> Result<Self> {
        let config = Self {
            mu,
            sigma,
            dt,
            n_blocks,
            burn_in,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= F::zero()) || !self.sigma.is_finite() {
            return Err(Error::out_of_range("sigma", self.sigma.as_f64(), "[0, inf)"));
        }
        if !(self.dt > F::zero()) || !self.dt.is_finite() {
            return Err(Error::out_of_range("dt", self.dt.as_f64(), "(0, inf)"));
        }
        if !self.mu.is_finite() {
            return Err(Error::out_of_range("mu", self.mu.as_f64(), "finite"));
        }
        if self.burn_in >= self.n_blocks {
            return Err(Error::out_of_range("burn_in", self.burn_in as f64, "[0, n_blocks)"));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Number of blocks kept for estimation.
    pub fn n_samples(&self) -> usize {
        self.n_blocks - self.burn_in
    }

    /// `σ²Δt`, the innovation variance.
    pub fn innovation_variance(&self) -> F {
        self.sigma * self.sigma * self.dt
    }
}

/// Per-block metrics recorded after the arbitrage trade.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockRecord<F> {
    pub block: u64,
    /// `s_n`
    pub log_true_price: F,
    /// `s_n - p_{n-1}`
    pub top_gap: F,
    /// `s_n - p_n`
    pub bot_gap: F,
    /// `log φ(R_n)` of the total reserves.
    pub log_liquidity: F,
    /// Value lost to the arbitrageur at the true price, in quote units.
    pub lvr: F,
    /// `lvr / V_{n-1}` with `V_{n-1}` the prior pool value at its own price.
    pub norm_lvr: F,
    /// Risky-asset value share of the total reserves at the true price.
    pub risky_weight: F,
    /// `(w_n - θ)²`
    pub tracking_error: F,
}

pub(crate) fn check_activeness<F: Scalar>(lambda: F, theta: F) -> Result<()> {
    if !(lambda > F::zero() && lambda <= F::one()) {
        return Err(Error::out_of_range("lambda", lambda.as_f64(), "(0, 1]"));
    }
    if !(theta > F::zero() && theta < F::one()) {
        return Err(Error::out_of_range("theta", theta.as_f64(), "(0, 1)"));
    }
    Ok(())
}
