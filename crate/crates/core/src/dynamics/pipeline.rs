use super::{BlockRecord, InnovationStream, SimConfig};
use crate::arbitrage::arbitrage_trade;
use crate::cfmm::{risky_weight, InvariantCurve, PricePoint, Reserves};
use crate::engine::{PoolState, SwapDelta};
use crate::error::Result;
use crate::scalar::Scalar;

/// Log prices `s_0, s_1, ..., s_n` of a seeded GBM with `n = n_blocks`.
pub fn gbm_path<F: Scalar>(config: &SimConfig<F>, s0: F) -> Result<Vec<F>> {
    config.validate()?;
    let mut shocks = InnovationStream::gbm(config.seed, config.mu, config.sigma, config.dt);
    let mut path = Vec::with_capacity(config.n_blocks + 1);
    let mut s = s0;
    path.push(s);
    for _ in 0..config.n_blocks {
        s = s + shocks.next_increment();
        path.push(s);
    }
    Ok(path)
}

/// Pool seeded at the true price `exp(log_price)` holding `x_amount` of the
/// risky asset and the matching quote amount.
pub fn seed_pool<F: Scalar, C: InvariantCurve<F>>(
    curve: C,
    lambda: F,
    rebalance_period: u64,
    x_amount: F,
    log_price: F,
) -> Result<PoolState<F, C>> {
    let unit = curve.reserves_from(PricePoint::new(F::one(), log_price))?;
    let y_amount = unit.y * (x_amount / unit.x);
    PoolState::new(curve, Reserves::new(x_amount, y_amount), lambda, rebalance_period, 0)
}

/// Runs one block at log true price `s`: rebalance, price-closing arbitrage
/// on the active reserves, then metrics of the merged total reserves.
pub fn step_block<F: Scalar, C: InvariantCurve<F>>(
    pool: &PoolState<F, C>,
    log_true_price: F,
    block: u64,
) -> Result<(PoolState<F, C>, BlockRecord<F>)> {
    let curve = pool.curve();
    let before = pool.total_reserves();
    let p_prev = curve.log_marginal_price(before)?;
    let value_prev = before.value_at(p_prev.exp());

    let rebalanced = pool.rebalance(block);
    let target = arbitrage_trade(curve, rebalanced.active(), log_true_price)?;
    let delta = SwapDelta::between(rebalanced.active(), target);
    let next = rebalanced.swap(delta, block)?;

    let after = next.total_reserves();
    let p_post = curve.log_marginal_price(after)?;
    let true_price = log_true_price.exp();
    // V(L_{n-1}, P_{n-1}, S_n) - V(L_n, P_n, S_n); the passive part cancels
    let lvr = F::zero() - (true_price * delta.dx + delta.dy);
    let weight = risky_weight(after, true_price);
    let deviation = weight - curve.target_weight(p_post)?;

    let record = BlockRecord {
        block,
        log_true_price,
        top_gap: log_true_price - p_prev,
        bot_gap: log_true_price - p_post,
        log_liquidity: curve.invariant_value(after)?.ln(),
        lvr,
        norm_lvr: lvr / value_prev,
        risky_weight: weight,
        tracking_error: deviation * deviation,
    };
    Ok((next, record))
}

/// Steps a pool through consecutive blocks.
#[derive(Debug, Clone)]
pub struct BlockDriver<F, C> {
    pool: PoolState<F, C>,
    block: u64,
}

impl<F: Scalar, C: InvariantCurve<F>> BlockDriver<F, C> {
    /// The first driven block is the one after the pool's last rebalance.
    pub fn new(pool: PoolState<F, C>) -> Self {
        let block = pool.last_rebalance_block();
        Self { pool, block }
    }

    pub fn pool(&self) -> &PoolState<F, C> {
        &self.pool
    }

    pub fn into_pool(self) -> PoolState<F, C> {
        self.pool
    }

    pub fn advance(&mut self, log_true_price: F) -> Result<BlockRecord<F>> {
        self.block += 1;
        let (pool, record) = step_block(&self.pool, log_true_price, self.block)?;
        self.pool = pool;
        Ok(record)
    }
}

/// Drives `pool` along a GBM path started at its current log price.
pub fn simulate_path<F: Scalar, C: InvariantCurve<F>>(
    config: &SimConfig<F>,
    pool: PoolState<F, C>,
) -> Result<Vec<BlockRecord<F>>> {
    let s0 = pool.curve().log_marginal_price(pool.total_reserves())?;
    let path = gbm_path(config, s0)?;
    let mut driver = BlockDriver::new(pool);
    path[1..].iter().map(|&s| driver.advance(s)).collect()
}
