use super::{
    check_activeness, seed_pool, step_block, BatchMeans, BlockDriver, InnovationStream, MomentEstimate, RateEstimate,
    SimConfig,
};
use crate::arbitrage::psi;
use crate::cfmm::{G3m, InvariantCurve};
use crate::error::Result;
use crate::scalar::Scalar;

/// Closed-form stationary `E[g²] ≈ σ²Δt / (λ(2-λ))`.
pub fn predicted_second_moment<F: Scalar>(lambda: F, sigma: F, dt: F) -> F {
    sigma * sigma * dt / (lambda * (F::lit(2.0) - lambda))
}

/// Closed-form normalized LVR rate `θ(1-θ)σ² / (2(2-λ))`.
pub fn predicted_lvr_rate<F: Scalar>(lambda: F, theta: F, sigma: F) -> F {
    let two = F::lit(2.0);
    theta * (F::one() - theta) * sigma * sigma / (two * (two - lambda))
}

/// Closed-form log-liquidity growth rate `θ(1-θ)σ²/2 · (1-λ)/(2-λ)`.
pub fn predicted_liquidity_growth_rate<F: Scalar>(lambda: F, theta: F, sigma: F) -> F {
    let two = F::lit(2.0);
    theta * (F::one() - theta) * sigma * sigma / two * (F::one() - lambda) / (two - lambda)
}

/// Stationary moments of the top-of-block gap from the scalar recursion
/// `g_{n+1} = Ψ(g_n) + ε_{n+1}`, started at `g_0 = 0`.
pub fn stationary_moments<F: Scalar>(lambda: F, theta: F, config: &SimConfig<F>) -> Result<MomentEstimate<F>> {
    check_activeness(lambda, theta)?;
    config.validate()?;
    let mut shocks = InnovationStream::gbm(config.seed, config.mu, config.sigma, config.dt);
    let n = config.n_samples();
    let mut first = BatchMeans::new(n, BatchMeans::<F>::DEFAULT_BATCHES);
    let mut second = BatchMeans::new(n, BatchMeans::<F>::DEFAULT_BATCHES);
    let mut g = F::zero();
    for block in 1..=config.n_blocks {
        g = psi(g, lambda, theta) + shocks.next_increment();
        if block > config.burn_in {
            first.push(g);
            second.push(g * g);
        }
    }
    Ok(MomentEstimate {
        mean_gap: first.mean(),
        mean_std_error: first.std_error(),
        second_moment_gap: second.mean(),
        std_error: second.std_error(),
        n_samples: n,
    })
}

/// Rates measured along one stationary pool path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRates<F> {
    /// `E[LVR_n / V_{n-1}] / Δt`
    pub lvr: RateEstimate<F>,
    /// `E[ℓ_n - ℓ_{n-1}] / Δt`
    pub liquidity_growth: RateEstimate<F>,
    /// Moments of the top gap along the same path.
    pub gap: MomentEstimate<F>,
}

/// Drives a freshly seeded G3M pool (1000 units of `X` at price 1) through
/// the full block pipeline and averages the post-burn-in per-block metrics.
pub fn stationary_path_rates<F: Scalar>(lambda: F, theta: F, config: &SimConfig<F>) -> Result<PathRates<F>> {
    check_activeness(lambda, theta)?;
    config.validate()?;
    let pool = seed_pool(G3m::new(theta)?, lambda, 1, F::lit(1000.0), F::zero())?;
    let mut shocks = InnovationStream::gbm(config.seed, config.mu, config.sigma, config.dt);
    let n = config.n_samples();
    let batches = BatchMeans::<F>::DEFAULT_BATCHES;
    let (mut lvr, mut growth) = (BatchMeans::new(n, batches), BatchMeans::new(n, batches));
    let (mut first, mut second) = (BatchMeans::new(n, batches), BatchMeans::new(n, batches));

    let mut s = F::zero();
    let mut log_liquidity = pool.curve().invariant_value(pool.total_reserves())?.ln();
    let mut driver = BlockDriver::new(pool);
    for block in 1..=config.n_blocks {
        s = s + shocks.next_increment();
        let record = driver.advance(s)?;
        if block > config.burn_in {
            lvr.push(record.norm_lvr);
            growth.push(record.log_liquidity - log_liquidity);
            first.push(record.top_gap);
            second.push(record.top_gap * record.top_gap);
        }
        log_liquidity = record.log_liquidity;
    }
    let per_time = |acc: &BatchMeans<F>| RateEstimate {
        rate: acc.mean() / config.dt,
        std_error: acc.std_error() / config.dt,
        n_samples: acc.count(),
    };
    Ok(PathRates {
        lvr: per_time(&lvr),
        liquidity_growth: per_time(&growth),
        gap: MomentEstimate {
            mean_gap: first.mean(),
            mean_std_error: first.std_error(),
            second_moment_gap: second.mean(),
            std_error: second.std_error(),
            n_samples: n,
        },
    })
}

/// Stationary normalized LVR per unit time.
pub fn lvr_rate_estimate<F: Scalar>(lambda: F, theta: F, config: &SimConfig<F>) -> Result<RateEstimate<F>> {
    Ok(stationary_path_rates(lambda, theta, config)?.lvr)
}

/// Stationary log-liquidity growth per unit time.
pub fn liquidity_growth_rate_estimate<F: Scalar>(
    lambda: F,
    theta: F,
    config: &SimConfig<F>,
) -> Result<RateEstimate<F>> {
    Ok(stationary_path_rates(lambda, theta, config)?.liquidity_growth)
}

/// Tracking error after one block with top gap `g`, exact from the pool
/// pipeline and from the leading term `θ²(1-θ)²(1-λ)² g²`.
pub fn tracking_error_check<F: Scalar>(lambda: F, theta: F, g: F) -> Result<(F, F)> {
    check_activeness(lambda, theta)?;
    let pool = seed_pool(G3m::new(theta)?, lambda, 1, F::one(), F::zero())?;
    let (_, record) = step_block(&pool, g, 1)?;
    let lead = theta * (F::one() - theta) * (F::one() - lambda) * g;
    Ok((record.tracking_error, lead * lead))
}

/// Blocks two gap chains started at `±start` and driven by the same
/// innovations need before their distance drops below `tol`.
///
/// Returns `None` if they have not met after `max_blocks`.
pub fn coupling_time<F: Scalar>(
    lambda: F,
    theta: F,
    config: &SimConfig<F>,
    start: F,
    tol: F,
    max_blocks: usize,
) -> Result<Option<usize>> {
    check_activeness(lambda, theta)?;
    let mut shocks = InnovationStream::gbm(config.seed, config.mu, config.sigma, config.dt);
    let (mut a, mut b) = (start, -start);
    for n in 1..=max_blocks {
        let e = shocks.next_increment();
        a = psi(a, lambda, theta) + e;
        b = psi(b, lambda, theta) + e;
        if (a - b).abs() < tol {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(sigma: f64, dt: f64, n: usize, burn: usize, seed: u64) -> SimConfig<f64> {
        SimConfig::new(0.0, sigma, dt, n, burn, seed).unwrap()
    }

    #[test]
    fn fully_active_gap_is_the_innovation() {
        let config = SimConfig::new(0.3, 0.5, 0.01f64, 200_000, 1_000, 11).unwrap();
        let est = stationary_moments(1.0, 0.4, &config).unwrap();
        let expected = 0.25 * 0.01 + 0.3 * 0.3 * 1e-4;
        assert!((est.second_moment_gap - expected).abs() < 4.0 * est.std_error);
        assert!(est.second_moment_gap >= est.mean_gap * est.mean_gap);
    }

    #[test]
    fn moments_match_closed_form_at_half_activeness() {
        let config = cfg(1.0, 1e-4, 300_000, 10_000, 3);
        let est = stationary_moments(0.5, 0.5, &config).unwrap();
        let predicted = predicted_second_moment(0.5, 1.0, 1e-4);
        assert!((est.second_moment_gap / predicted - 1.0).abs() < 0.03);
    }

    #[test]
    fn lvr_rate_is_monotone_in_lambda() {
        let config = cfg(1.0, 1e-4, 60_000, 2_000, 5);
        let rates: Vec<f64> = [0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&l| lvr_rate_estimate(l, 0.5, &config).unwrap().rate)
            .collect();
        assert!(rates.windows(2).all(|w| w[0] < w[1]), "{rates:?}");
    }

    #[test]
    fn zero_growth_when_fully_active() {
        let config = cfg(1.0, 1e-4, 50_000, 1_000, 9);
        let est = liquidity_growth_rate_estimate(1.0, 0.5, &config).unwrap();
        assert!(est.rate.abs() < 1e-6, "{est:?}");
        let half = liquidity_growth_rate_estimate(0.5, 0.5, &config).unwrap();
        assert!(half.rate > 0.0);
    }

    #[test]
    fn per_block_growth_coefficient_peaks_at_half() {
        let coefficient = |l: f64| l * (1.0 - l);
        let best = (1..100)
            .map(|i| i as f64 / 100.0)
            .max_by(|a, b| coefficient(*a).total_cmp(&coefficient(*b)))
            .unwrap();
        assert_eq!(best, 0.5);
    }

    #[test]
    fn tracking_error_edge_cases() {
        assert_eq!(tracking_error_check(0.5, 0.3, 0.0).unwrap(), (0.0, 0.0));
        let (exact, lead) = tracking_error_check(1.0, 0.3, 0.2).unwrap();
        assert!(exact < 1e-28);
        assert_eq!(lead, 0.0);
        let (exact, lead) = tracking_error_check(0.5, 0.5, 0.01f64).unwrap();
        assert!((exact - lead).abs() <= 1e-6 * 0.01f64.powi(3) * 1e3);
    }

    #[test]
    fn invalid_activeness_rejected() {
        let config = cfg(1.0, 1e-4, 100, 10, 1);
        assert!(stationary_moments(0.0, 0.5, &config).is_err());
        assert!(lvr_rate_estimate(1.2, 0.5, &config).is_err());
        assert!(tracking_error_check(0.5, 1.0, 0.1).is_err());
    }
}
