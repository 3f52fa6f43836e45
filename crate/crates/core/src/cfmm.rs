//! Constant function market maker invariants.
//!
//! A curve is a 1-homogeneous, strictly concave invariant `φ(x, y)` over
//! the open positive quadrant. Liquidity is `φ(R)`, the marginal price of
//! `X` in units of `Y` is `φ_x / φ_y`, and `(L, p)` is the chart that maps
//! a liquidity level and a log marginal price back to reserves.
//!
//! [`G3m`] (weighted geometric mean) is the only shipped curve. The trait's
//! default methods only use `φ` and its gradient, so another curve works by
//! implementing those two; the G3M overrides replace the root finders with
//! closed forms.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reserves of the risky asset `x` and the quote asset `y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reserves<F> {
    pub x: F,
    pub y: F,
}

impl<F: Scalar> Reserves<F> {
    pub fn new(x: F, y: F) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(F::zero(), F::zero())
    }

    pub fn scaled(self, factor: F) -> Self {
        Self::new(self.x * factor, self.y * factor)
    }

    pub fn is_positive(&self) -> bool {
        self.x > F::zero() && self.y > F::zero()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.x >= F::zero() && self.y >= F::zero()
    }

    pub fn ensure_positive(self) -> Result<Self> {
        if self.is_positive() && self.x.is_finite() && self.y.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonPositiveReserves {
                x: self.x.as_f64(),
                y: self.y.as_f64(),
            })
        }
    }

    /// Value at an external price `true_price` of `X` in units of `Y`.
    pub fn value_at(&self, true_price: F) -> F {
        true_price * self.x + self.y
    }
}

impl<F: Scalar> Add for Reserves<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<F: Scalar> Sub for Reserves<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// A point of the `(L, p)` chart: liquidity and log marginal price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint<F> {
    pub liquidity: F,
    pub log_price: F,
}

impl<F: Scalar> PricePoint<F> {
    pub fn new(liquidity: F, log_price: F) -> Self {
        Self { liquidity, log_price }
    }
}

/// Value share of the risky asset, `S x / (S x + y)`.
pub fn risky_weight<F: Scalar>(r: Reserves<F>, true_price: F) -> F {
    let risky = true_price * r.x;
    risky / (risky + r.y)
}

fn root_tolerance<F: Scalar>(floor: f64) -> F {
    F::lit(floor).max(F::epsilon() * F::lit(64.0))
}

const MAX_ROOT_STEPS: usize = 512;

/// Bisection for an increasing function on the real line, expanding the
/// bracket geometrically from `guess`. Stops once `|f| <= tol` or the
/// bracket collapses to a few ulps.
fn bisect_increasing<F: Scalar>(f: impl Fn(F) -> F, guess: F, tol: F, what: &'static str) -> Result<F> {
    let mut step = F::one();
    let (mut lo, mut hi) = (guess, guess);
    let mut steps = 0;
    while f(lo) > F::zero() {
        lo = lo - step;
        step = step + step;
        steps += 1;
        if steps > 128 || !lo.is_finite() {
            return Err(Error::RootNotBracketed(what));
        }
    }
    step = F::one();
    while f(hi) < F::zero() {
        hi = hi + step;
        step = step + step;
        steps += 1;
        if steps > 256 || !hi.is_finite() {
            return Err(Error::RootNotBracketed(what));
        }
    }
    let two = F::lit(2.0);
    for _ in 0..MAX_ROOT_STEPS {
        let mid = lo + (hi - lo) / two;
        let value = f(mid);
        if value.abs() <= tol {
            return Ok(mid);
        }
        if value < F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= F::epsilon() * F::lit(4.0) * F::one().max(mid.abs()) {
            return Ok(lo + (hi - lo) / two);
        }
    }
    Ok(lo + (hi - lo) / two)
}

/// A two-asset CFMM invariant.
///
/// Implementors supply the raw invariant and its gradient on the open
/// positive quadrant; checked entry points and the reparametrization are
/// provided.
pub trait InvariantCurve<F: Scalar>: Clone + std::fmt::Debug + Send + Sync {
    /// `φ(x, y)` for strictly positive arguments.
    fn phi(&self, x: F, y: F) -> F;

    /// `(φ_x, φ_y)` for strictly positive arguments.
    fn gradient(&self, x: F, y: F) -> (F, F);

    fn invariant_value(&self, r: Reserves<F>) -> Result<F> {
        let r = r.ensure_positive()?;
        Ok(self.phi(r.x, r.y))
    }

    fn log_marginal_price(&self, r: Reserves<F>) -> Result<F> {
        let r = r.ensure_positive()?;
        let (gx, gy) = self.gradient(r.x, r.y);
        Ok(gx.ln() - gy.ln())
    }

    fn marginal_price(&self, r: Reserves<F>) -> Result<F> {
        let r = r.ensure_positive()?;
        let (gx, gy) = self.gradient(r.x, r.y);
        Ok(gx / gy)
    }

    /// Reserves `R(L, p)` with `φ = L` and log marginal price `p`.
    ///
    /// By homogeneity `R(L, p) = L R(1, p)`; the ray `(1, e^t)` is searched
    /// for the log reserve ratio `t` whose marginal price is `p`.
    fn reserves_from(&self, pt: PricePoint<F>) -> Result<Reserves<F>> {
        if !(pt.liquidity > F::zero()) || !pt.liquidity.is_finite() {
            return Err(Error::out_of_range("liquidity", pt.liquidity.as_f64(), "(0, inf)"));
        }
        let price_on_ray = |t: F| {
            let (gx, gy) = self.gradient(F::one(), t.exp());
            gx.ln() - gy.ln() - pt.log_price
        };
        let t = bisect_increasing(
            price_on_ray,
            pt.log_price,
            root_tolerance(1e-13),
            "log price on level set",
        )?;
        let ratio = t.exp();
        let x = pt.liquidity / self.phi(F::one(), ratio);
        Reserves::new(x, x * ratio).ensure_positive()
    }

    /// Pool value `V(L, P, S) = S x(L, log P) + y(L, log P)`.
    fn pool_value(&self, pt: PricePoint<F>, true_price: F) -> Result<F> {
        if !(true_price > F::zero()) {
            return Err(Error::out_of_range("true price", true_price.as_f64(), "(0, inf)"));
        }
        Ok(self.reserves_from(pt)?.value_at(true_price))
    }

    /// Change in `y` that keeps `φ` constant when `x` changes by `dx`.
    fn output_for_input(&self, r: Reserves<F>, dx: F) -> Result<F> {
        let r = r.ensure_positive()?;
        if dx == F::zero() {
            return Ok(F::zero());
        }
        let x_new = r.x + dx;
        if !(x_new > F::zero()) {
            return Err(Error::NonPositiveReserves {
                x: x_new.as_f64(),
                y: r.y.as_f64(),
            });
        }
        let level = self.phi(r.x, r.y);
        let log_y = bisect_increasing(
            |u: F| self.phi(x_new, u.exp()) / level - F::one(),
            r.y.ln(),
            root_tolerance(1e-14),
            "output reserve on level set",
        )?;
        let y_new = log_y.exp();
        if !(y_new > F::zero()) {
            return Err(Error::NonPositiveReserves {
                x: x_new.as_f64(),
                y: y_new.as_f64(),
            });
        }
        Ok(y_new - r.y)
    }

    /// Risky-asset value share of `R(1, p)` at its own marginal price.
    fn target_weight(&self, log_price: F) -> Result<F> {
        let r = self.reserves_from(PricePoint::new(F::one(), log_price))?;
        Ok(risky_weight(r, log_price.exp()))
    }
}

/// Two-asset geometric mean market maker, `φ(x, y) = x^θ y^(1-θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G3m<F> {
    theta: F,
    /// `ln(θ / (1 - θ))`, the log price of equal reserves.
    log_odds: F,
}

impl<F: Scalar> G3m<F> {
    pub fn new(theta: F) -> Result<Self> {
        if !(theta > F::zero() && theta < F::one()) {
            return Err(Error::out_of_range("theta", theta.as_f64(), "(0, 1)"));
        }
        Ok(Self {
            theta,
            log_odds: theta.ln() - (F::one() - theta).ln(),
        })
    }

    /// Weight of the risky asset.
    pub fn theta(&self) -> F {
        self.theta
    }

    /// Baseline instantaneous LVR rate of a fully active G3M holding value
    /// `value`: `σ²/2 · θ(1-θ) · V`.
    pub fn cfmm_lvr_rate(&self, value: F, sigma: F) -> F {
        let half = F::lit(0.5);
        half * sigma * sigma * self.theta * (F::one() - self.theta) * value
    }
}

impl<F: Scalar> InvariantCurve<F> for G3m<F> {
    fn phi(&self, x: F, y: F) -> F {
        // θ + (1-θ) need not round to 1; this form keeps the log-liquidity
        // coefficient exactly 1
        let (lx, ly) = (x.ln(), y.ln());
        (ly + self.theta * (lx - ly)).exp()
    }

    fn gradient(&self, x: F, y: F) -> (F, F) {
        let phi = self.phi(x, y);
        (self.theta * phi / x, (F::one() - self.theta) * phi / y)
    }

    fn log_marginal_price(&self, r: Reserves<F>) -> Result<F> {
        let r = r.ensure_positive()?;
        Ok(self.log_odds + r.y.ln() - r.x.ln())
    }

    fn marginal_price(&self, r: Reserves<F>) -> Result<F> {
        let r = r.ensure_positive()?;
        Ok(self.theta / (F::one() - self.theta) * (r.y / r.x))
    }

    fn reserves_from(&self, pt: PricePoint<F>) -> Result<Reserves<F>> {
        if !(pt.liquidity > F::zero()) || !pt.liquidity.is_finite() {
            return Err(Error::out_of_range("liquidity", pt.liquidity.as_f64(), "(0, inf)"));
        }
        let log_l = pt.liquidity.ln();
        let shift = self.log_odds - pt.log_price;
        let x = (log_l + (F::one() - self.theta) * shift).exp();
        let y = (log_l - self.theta * shift).exp();
        Reserves::new(x, y).ensure_positive()
    }

    fn output_for_input(&self, r: Reserves<F>, dx: F) -> Result<F> {
        let r = r.ensure_positive()?;
        if dx == F::zero() {
            return Ok(F::zero());
        }
        let rel = dx / r.x;
        if !(rel > -F::one()) {
            return Err(Error::NonPositiveReserves {
                x: (r.x + dx).as_f64(),
                y: r.y.as_f64(),
            });
        }
        // y' = y (x / x')^(θ/(1-θ))
        let exponent = -self.theta / (F::one() - self.theta) * rel.ln_1p();
        let dy = r.y * exponent.exp_m1();
        if !(r.y + dy > F::zero()) {
            return Err(Error::NonPositiveReserves {
                x: (r.x + dx).as_f64(),
                y: (r.y + dy).as_f64(),
            });
        }
        Ok(dy)
    }

    fn target_weight(&self, _log_price: F) -> Result<F> {
        Ok(self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// G3M evaluated only through the trait defaults, so the generic root
    /// finders get exercised against the closed forms.
    #[derive(Debug, Clone)]
    struct Generic(G3m<f64>);

    impl InvariantCurve<f64> for Generic {
        fn phi(&self, x: f64, y: f64) -> f64 {
            self.0.phi(x, y)
        }
        fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
            self.0.gradient(x, y)
        }
    }

    fn g3m(theta: f64) -> G3m<f64> {
        G3m::new(theta).unwrap()
    }

    #[test]
    fn repeated_reparametrization_keeps_liquidity() {
        // fl(0.3) + fl(1 - 0.3) < 1, which used to shrink ln φ every round
        let c = g3m(0.3);
        let mut l = 1000.0;
        for k in 0..20_000 {
            let p = 0.01 * (k as f64 * 0.7).sin();
            l = c
                .invariant_value(c.reserves_from(PricePoint::new(l, p)).unwrap())
                .unwrap();
        }
        assert!((l.ln() - 1000f64.ln()).abs() < 2e-13, "{}", l.ln() - 1000f64.ln());
    }

    #[test]
    fn invariant_value_examples() {
        let c = g3m(0.5);
        assert_eq!(c.invariant_value(Reserves::new(1.0, 1.0)).unwrap(), 1.0);
        assert_relative_eq!(
            c.invariant_value(Reserves::new(4.0, 1.0)).unwrap(),
            2.0,
            max_relative = 1e-15
        );
        // independent route: direct powf
        let expected = 2f64.powf(0.3) * 3f64.powf(0.7);
        assert_relative_eq!(
            g3m(0.3).invariant_value(Reserves::new(2.0, 3.0)).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(expected, 2.0 * 1.5f64.powf(0.7), max_relative = 1e-14);
    }

    #[test]
    fn marginal_price_examples() {
        assert_eq!(g3m(0.5).marginal_price(Reserves::new(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(g3m(0.5).marginal_price(Reserves::new(1.0, 2.0)).unwrap(), 2.0);
        assert_relative_eq!(
            g3m(0.25).marginal_price(Reserves::new(3.0, 9.0)).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            g3m(0.25).log_marginal_price(Reserves::new(3.0, 9.0)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn boundary_reserves_rejected() {
        let c = g3m(0.5);
        for r in [
            Reserves::new(0.0, 1.0),
            Reserves::new(1.0, 0.0),
            Reserves::new(-1.0, 1.0),
        ] {
            assert!(matches!(c.invariant_value(r), Err(Error::NonPositiveReserves { .. })));
            assert!(c.marginal_price(r).is_err());
            assert!(c.log_marginal_price(r).is_err());
        }
        assert!(G3m::new(0.0f64).is_err());
        assert!(G3m::new(1.0f64).is_err());
    }

    #[test]
    fn reserves_from_examples() {
        let c = g3m(0.5);
        let r = c.reserves_from(PricePoint::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(r.x, 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.y, 1.0, max_relative = 1e-15);
        let r = c.reserves_from(PricePoint::new(1.0, 4f64.ln())).unwrap();
        assert_relative_eq!(r.x, 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.y, 2.0, max_relative = 1e-15);

        let c = g3m(0.3);
        let r = c.reserves_from(PricePoint::new(5.0, 0.7)).unwrap();
        assert_relative_eq!(c.invariant_value(r).unwrap(), 5.0, max_relative = 1e-12);
        assert_relative_eq!(c.log_marginal_price(r).unwrap(), 0.7, max_relative = 1e-12);
        assert!(c.reserves_from(PricePoint::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn pool_value_examples() {
        let c = g3m(0.5);
        assert_relative_eq!(c.pool_value(PricePoint::new(1.0, 0.0), 1.0).unwrap(), 2.0);
        assert_relative_eq!(c.pool_value(PricePoint::new(1.0, 0.0), 4.0).unwrap(), 5.0);
        assert_relative_eq!(
            c.pool_value(PricePoint::new(1.0, 4f64.ln()), 4.0).unwrap(),
            4.0,
            max_relative = 1e-15
        );
        assert!(c.pool_value(PricePoint::new(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn cfmm_lvr_rate_examples() {
        assert_relative_eq!(g3m(0.5).cfmm_lvr_rate(8.0, 1.0), 1.0);
        assert_eq!(g3m(0.3).cfmm_lvr_rate(123.0, 0.0), 0.0);
        // normalized PA-AMM rate θ(1-θ)σ²/(2(2-λ)) at λ = 1, times V
        let (theta, sigma, value, lambda) = (0.5, 0.8, 17.0, 1.0);
        let pa_rate = theta * (1.0 - theta) * sigma * sigma / (2.0 * (2.0 - lambda));
        assert_relative_eq!(
            g3m(theta).cfmm_lvr_rate(value, sigma),
            pa_rate * value,
            max_relative = 1e-15
        );
    }

    #[test]
    fn lvr_rate_matches_price_aligned_value_curvature() {
        // -(σ²P²/2) V''(P) with V(P) = P x(L, log P) + y(L, log P)
        let c = g3m(0.5);
        let sigma = 0.7;
        let value = |p: f64| c.pool_value(PricePoint::new(3.0, p.ln()), p).unwrap();
        for p in [0.5, 1.0, 2.5] {
            let h = 1e-3 * p;
            let second = (value(p + h) - 2.0 * value(p) + value(p - h)) / (h * h);
            let from_curvature = -0.5 * sigma * sigma * p * p * second;
            let closed = c.cfmm_lvr_rate(value(p), sigma);
            assert_relative_eq!(from_curvature, closed, max_relative = 1e-6);
        }
    }

    #[test]
    fn generic_defaults_agree_with_closed_forms() {
        for theta in [0.2, 0.5, 0.83] {
            let closed = g3m(theta);
            let generic = Generic(closed);
            let r = Reserves::new(2.0, 7.0);
            assert_relative_eq!(
                generic.log_marginal_price(r).unwrap(),
                closed.log_marginal_price(r).unwrap(),
                max_relative = 1e-13
            );
            for (l, p) in [(1.0, 0.0), (5.0, 0.7), (1e-3, -4.0), (1e6, 4.5)] {
                let a = closed.reserves_from(PricePoint::new(l, p)).unwrap();
                let b = generic.reserves_from(PricePoint::new(l, p)).unwrap();
                assert_relative_eq!(a.x, b.x, max_relative = 1e-11);
                assert_relative_eq!(a.y, b.y, max_relative = 1e-11);
            }
            for dx in [-1.5, -0.1, 0.5, 30.0] {
                let a = closed.output_for_input(r, dx).unwrap();
                let b = generic.output_for_input(r, dx).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-11);
            }
            assert_relative_eq!(generic.target_weight(0.3).unwrap(), theta, max_relative = 1e-12);
        }
    }

    #[test]
    fn output_for_input_constant_product() {
        let c = g3m(0.5);
        let dy = c.output_for_input(Reserves::new(1.0, 1.0), 1.0).unwrap();
        assert_relative_eq!(dy, -0.5, max_relative = 1e-15);
        assert_eq!(c.output_for_input(Reserves::new(1.0, 1.0), 0.0).unwrap(), 0.0);
        assert!(c.output_for_input(Reserves::new(1.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn single_precision_instance() {
        let c = G3m::new(0.5f32).unwrap();
        let r = c.reserves_from(PricePoint::new(1.0f32, 4f32.ln())).unwrap();
        assert!((r.x - 0.5).abs() < 1e-6 && (r.y - 2.0).abs() < 1e-5);
    }
}
