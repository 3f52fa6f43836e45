//! Frictionless competitive arbitrage and the one-block gap map.
//!
//! Each block a single arbitrageur trade moves the active reserves along
//! their level set until their marginal price equals the true price. After
//! merging with the passive part, the pool's log price has only closed part
//! of the gap. For a G3M the post-block gap is `Ψ(g)` where `g` is the gap
//! at the top of the block, independent of price level and liquidity:
//!
//! ```text
//! Ψ(g) = g - log(1 - λ + λ e^{θg}) + log(1 - λ + λ e^{-(1-θ)g})
//! ```

use crate::cfmm::{InvariantCurve, PricePoint, Reserves};
use crate::error::Result;
use crate::scalar::Scalar;

/// Top- and bottom-of-block log price gaps, `s - p_prev` and `s - p_post`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GapState<F> {
    pub top_gap: F,
    pub bot_gap: F,
}

/// Active reserves after the price-closing arbitrage trade to log price `s`.
pub fn arbitrage_trade<F: Scalar, C: InvariantCurve<F>>(
    curve: &C,
    active: Reserves<F>,
    log_true_price: F,
) -> Result<Reserves<F>> {
    let liquidity = curve.invariant_value(active)?;
    let gap = log_true_price - curve.log_marginal_price(active)?;
    // below the resolution of the log price: no profitable trade exists
    if gap.abs() <= F::epsilon() * F::lit(4.0) * F::one().max(log_true_price.abs()) {
        return Ok(active);
    }
    curve.reserves_from(PricePoint::new(liquidity, log_true_price))
}

/// `log(1 - λ + λ e^z)` without cancellation for either sign of `z`.
pub(crate) fn log_mix<F: Scalar>(lambda: F, z: F) -> F {
    if z > F::zero() {
        (lambda * z.exp_m1()).ln_1p()
    } else {
        z + ((F::one() - lambda) * (-z).exp_m1()).ln_1p()
    }
}

/// `λ e^z / (1 - λ + λ e^z)`, the active share of a component after a move.
fn active_share<F: Scalar>(lambda: F, z: F) -> F {
    lambda / (lambda + (F::one() - lambda) * (-z).exp())
}

/// Exact post-arbitrage gap `Ψ(g)` of a G3M pool with activeness `λ` and
/// weight `θ`.
pub fn psi<F: Scalar>(g: F, lambda: F, theta: F) -> F {
    g - log_mix(lambda, theta * g) + log_mix(lambda, -(F::one() - theta) * g)
}

/// `Ψ'(g)`; lies in `[0, ρ]` with `ρ` from [`contraction_bound`].
pub fn psi_prime<F: Scalar>(g: F, lambda: F, theta: F) -> F {
    let phi = F::one() - theta;
    F::one() - theta * active_share(lambda, theta * g) - phi * active_share(lambda, -phi * g)
}

/// Lipschitz constant of `Ψ`: `1 - λ min(θ, 1-θ)`.
pub fn contraction_bound<F: Scalar>(lambda: F, theta: F) -> F {
    F::one() - lambda * theta.min(F::one() - theta)
}

/// Log marginal price of the merged reserves
/// `(1-λ) R(1, p) + λ R(1, p + g)`, i.e. after the arbitrageur moved the
/// active part from `p_prev` to `p_prev + g`.
pub fn merged_log_price<F: Scalar>(p_prev: F, g: F, lambda: F, theta: F) -> F {
    p_prev + log_mix(lambda, theta * g) - log_mix(lambda, -(F::one() - theta) * g)
}

/// One-block log-liquidity increment `ℓ_n - ℓ_{n-1}` for a top gap `g`.
pub fn log_liquidity_step<F: Scalar>(g: F, lambda: F, theta: F) -> F {
    let phi = F::one() - theta;
    theta * log_mix(lambda, -phi * g) + phi * log_mix(lambda, theta * g)
}
