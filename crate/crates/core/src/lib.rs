//! Partially active automated market makers.
//!
//! A PA-AMM is a constant function market maker that exposes only a
//! fraction `λ` of its reserves to trading in each block. The crate covers
//! the geometric mean invariant ([`cfmm`]), the pool state machine
//! ([`engine`]), one-block arbitrage and the gap map ([`arbitrage`]),
//! seeded block simulation and estimators ([`dynamics`]), and the optimal
//! choice of `λ` ([`control`]).
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.

// `!(x > 0)` is how NaN gets rejected alongside non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arbitrage;
pub mod cfmm;
pub mod control;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod scalar;

pub use arbitrage::{
    arbitrage_trade, contraction_bound, log_liquidity_step, merged_log_price, psi, psi_prime, GapState,
};
pub use cfmm::{risky_weight, G3m, InvariantCurve, PricePoint, Reserves};
pub use control::{
    feedback_constant, feedback_lambda, lambda_star, solve_riccati, stationary_loss, value_iteration_oracle,
    ControlParams, GridSpec, OracleSolution, RiccatiSolution,
};
pub use dynamics::{BlockRecord, SimConfig};
pub use engine::{PoolState, SwapDelta};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type G3m64 = G3m<f64>;
pub type G3m32 = G3m<f32>;
pub type Reserves64 = Reserves<f64>;
pub type Reserves32 = Reserves<f32>;
pub type PricePoint64 = PricePoint<f64>;
pub type PricePoint32 = PricePoint<f32>;
pub type PoolState64 = PoolState<f64>;
pub type PoolState32 = PoolState<f32>;
pub type SwapDelta64 = SwapDelta<f64>;
pub type SwapDelta32 = SwapDelta<f32>;
pub type BlockRecord64 = BlockRecord<f64>;
pub type BlockRecord32 = BlockRecord<f32>;
pub type SimConfig64 = SimConfig<f64>;
pub type SimConfig32 = SimConfig<f32>;
pub type ControlParams64 = ControlParams<f64>;
pub type ControlParams32 = ControlParams<f32>;
pub type RiccatiSolution64 = RiccatiSolution<f64>;
pub type RiccatiSolution32 = RiccatiSolution<f32>;
