//! The partially active pool.
//!
//! Total reserves are split into an active part, which is the only part
//! the invariant quotes against, and an idle passive part. The first
//! interaction of an eligible block re-partitions so that the active part
//! is a `λ` fraction of the total again. Trades inside one block all see
//! the same active reserves.

use crate::cfmm::{G3m, InvariantCurve, Reserves};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Signed change of the active reserves requested by a trader.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwapDelta<F> {
    pub dx: F,
    pub dy: F,
}

impl<F: Scalar> SwapDelta<F> {
    pub fn new(dx: F, dy: F) -> Self {
        Self { dx, dy }
    }

    /// The trade that moves `from` onto `to`.
    pub fn between(from: Reserves<F>, to: Reserves<F>) -> Self {
        Self::new(to.x - from.x, to.y - from.y)
    }
}

/// State of a PA-AMM pool. Transitions take `&self` and return a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolState<F, C = G3m<F>> {
    curve: C,
    active: Reserves<F>,
    passive: Reserves<F>,
    lambda: F,
    last_rebalance_block: u64,
    rebalance_period: u64,
}

fn check_lambda<F: Scalar>(lambda: F) -> Result<()> {
    if lambda > F::zero() && lambda <= F::one() {
        Ok(())
    } else {
        Err(Error::out_of_range("lambda", lambda.as_f64(), "(0, 1]"))
    }
}

impl<F: Scalar, C: InvariantCurve<F>> PoolState<F, C> {
    /// Seeds a pool with `total` reserves, partitioned at `block`.
    pub fn new(curve: C, total: Reserves<F>, lambda: F, rebalance_period: u64, block: u64) -> Result<Self> {
        check_lambda(lambda)?;
        let total = total.ensure_positive()?;
        let active = total.scaled(lambda);
        Self::from_parts(curve, active, total - active, lambda, rebalance_period, block)
    }

    /// Builds a pool from an explicit partition.
    pub fn from_parts(
        curve: C,
        active: Reserves<F>,
        passive: Reserves<F>,
        lambda: F,
        rebalance_period: u64,
        last_rebalance_block: u64,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        if rebalance_period == 0 {
            return Err(Error::out_of_range("rebalance period", 0.0, "[1, inf)"));
        }
        let active = active.ensure_positive()?;
        if !passive.is_nonnegative() {
            return Err(Error::NonPositiveReserves {
                x: passive.x.as_f64(),
                y: passive.y.as_f64(),
            });
        }
        Ok(Self {
            curve,
            active,
            passive,
            lambda,
            last_rebalance_block,
            rebalance_period,
        })
    }

    pub fn curve(&self) -> &C {
        &self.curve
    }

    pub fn active(&self) -> Reserves<F> {
        self.active
    }

    pub fn passive(&self) -> Reserves<F> {
        self.passive
    }

    pub fn lambda(&self) -> F {
        self.lambda
    }

    pub fn last_rebalance_block(&self) -> u64 {
        self.last_rebalance_block
    }

    pub fn rebalance_period(&self) -> u64 {
        self.rebalance_period
    }

    pub fn total_reserves(&self) -> Reserves<F> {
        self.active + self.passive
    }

    /// Same pool with a different activeness, effective from the next
    /// rebalance.
    pub fn with_lambda(&self, lambda: F) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda, ..self.clone() })
    }

    /// Whether an interaction at `block` re-partitions the reserves.
    pub fn is_rebalance_due(&self, block: u64) -> bool {
        block.saturating_sub(self.last_rebalance_block) >= self.rebalance_period
    }

    /// Resets the active reserves to `λ · total` when `block` is eligible;
    /// otherwise returns the state unchanged.
    pub fn rebalance(&self, block: u64) -> Self {
        debug_assert!(block >= self.last_rebalance_block, "block height went backwards");
        if !self.is_rebalance_due(block) {
            return self.clone();
        }
        let total = self.total_reserves();
        let active = total.scaled(self.lambda);
        Self {
            active,
            passive: total - active,
            last_rebalance_block: block,
            ..self.clone()
        }
    }

    /// Executes a trade against the active reserves after the block's
    /// rebalance. Accepts any trade that does not decrease the invariant
    /// beyond the rounding of the new reserves.
    pub fn swap(&self, delta: SwapDelta<F>, block: u64) -> Result<Self> {
        let pool = self.rebalance(block);
        let next = Reserves::new(pool.active.x + delta.dx, pool.active.y + delta.dy).ensure_positive()?;
        let before = pool.curve.invariant_value(pool.active)?;
        let after = pool.curve.invariant_value(next)?;
        // `old + delta` is only accurate to ~eps of the old reserves, which
        // is a larger relative error in a component the trade nearly drains
        let conditioning = (pool.active.x / next.x).max(pool.active.y / next.y).max(F::one());
        if after < before * (F::one() - F::invariant_rtol() * conditioning) {
            return Err(Error::InvariantViolation {
                before: before.as_f64(),
                after: after.as_f64(),
            });
        }
        Ok(Self { active: next, ..pool })
    }

    /// Output `dy` (negative for `dx > 0`) that an exact-input trade of `dx`
    /// would receive at `block`, without executing it.
    pub fn quote_exact_in(&self, dx: F, block: u64) -> Result<F> {
        let pool = self.rebalance(block);
        pool.curve.output_for_input(pool.active, dx)
    }

    /// Executes an exact-input trade, keeping the invariant of the active
    /// reserves unchanged. Returns the new state and `dy`.
    pub fn swap_exact_in(&self, dx: F, block: u64) -> Result<(Self, F)> {
        let pool = self.rebalance(block);
        let dy = pool.curve.output_for_input(pool.active, dx)?;
        let next = pool.swap(SwapDelta::new(dx, dy), block)?;
        Ok((next, dy))
    }
}
