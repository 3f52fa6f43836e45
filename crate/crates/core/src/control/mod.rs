//! Optimal activeness.
//!
//! The pool operator trades tracking error against `γ`-weighted LVR. To
//! leading order the per-block cost is `((1-λ)² + γλ) g²` with the gap
//! following `g' = (1-λ) g + ε`, `ε ~ N(μΔt, σ²Δt)`. Writing `u = 1 - λ`
//! gives a scalar discounted LQ problem whose value function is quadratic:
//!
//! ```text
//! V(g) = min_u { (u² - γu + γ) g² + β E[V(ug + ε)] },   β = e^{-ϱΔt}
//! ```
//!
//! [`solve_riccati`] returns its coefficients, [`feedback_lambda`] the
//! optimal policy, and [`value_iteration_oracle`] solves the same equation
//! by brute force on a grid.

mod oracle;
mod quadrature;
mod riccati;

pub use oracle::{value_iteration_oracle, value_iteration_oracle_with, GridSpec, OracleSettings, OracleSolution};
pub use quadrature::{gauss_hermite, GaussHermite};
pub use riccati::{solve_riccati, RiccatiResiduals, RiccatiSolution};

use crate::error::{Error, Result};
use crate::scalar::{clip, Scalar};

/// Parameters of the activeness control problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams<F> {
    /// LVR weight `γ = γ' / (2θ(1-θ))`.
    pub gamma: F,
    /// Discount rate `ϱ` per unit time.
    pub rho_disc: F,
    pub dt: F,
    pub mu: F,
    pub sigma: F,
    /// Lower bound `λ̲` on the activeness.
    pub lambda_lower: F,
}

impl<F: Scalar> ControlParams<F> {
    pub fn default_lambda_lower() -> F {
        F::lit(0.05)
    }

    pub fn new(gamma: F, rho_disc: F, dt: F, mu: F, sigma: F, lambda_lower: F) -> Result<Self> {
        let params = Self {
            gamma,
            rho_disc,
            dt,
            mu,
            sigma,
            lambda_lower,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters whose discount factor is `beta`, i.e. `ϱ = -ln(β)/Δt`.
    pub fn with_beta(gamma: F, beta: F, dt: F, mu: F, sigma: F, lambda_lower: F) -> Result<Self> {
        if !(beta > F::zero() && beta <= F::one()) {
            return Err(Error::out_of_range("beta", beta.as_f64(), "(0, 1]"));
        }
        let rho = if beta == F::one() { F::zero() } else { -beta.ln() / dt };
        Self::new(gamma, rho, dt, mu, sigma, lambda_lower)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= F::zero()) || !self.gamma.is_finite() {
            return Err(Error::out_of_range("gamma", self.gamma.as_f64(), "[0, inf)"));
        }
        if !(self.rho_disc >= F::zero()) || !self.rho_disc.is_finite() {
            return Err(Error::out_of_range("rho", self.rho_disc.as_f64(), "[0, inf)"));
        }
        if !(self.dt > F::zero()) || !self.dt.is_finite() {
            return Err(Error::out_of_range("dt", self.dt.as_f64(), "(0, inf)"));
        }
        if !self.mu.is_finite() {
            return Err(Error::out_of_range("mu", self.mu.as_f64(), "finite"));
        }
        if !(self.sigma >= F::zero()) || !self.sigma.is_finite() {
            return Err(Error::out_of_range("sigma", self.sigma.as_f64(), "[0, inf)"));
        }
        if !(self.lambda_lower > F::zero() && self.lambda_lower < F::one()) {
            return Err(Error::out_of_range(
                "lambda_lower",
                self.lambda_lower.as_f64(),
                "(0, 1)",
            ));
        }
        Ok(())
    }

    /// Per-block discount factor `e^{-ϱΔt}`.
    pub fn beta(&self) -> F {
        (-self.rho_disc * self.dt).exp()
    }

    /// Innovation mean `μΔt`.
    pub fn m(&self) -> F {
        self.mu * self.dt
    }

    /// Innovation second moment `σ²Δt + μ²Δt²`.
    pub fn s2(&self) -> F {
        let m = self.m();
        self.sigma * self.sigma * self.dt + m * m
    }
}

/// Optimal activeness `λ^opt(g)` for the problem solved by `sol`, clipped to
/// `[λ̲, 1]`. At `g = 0` the state term is dropped (its limit by continuity
/// of the unclipped constant part).
pub fn feedback_lambda<F: Scalar>(g: F, sol: &RiccatiSolution<F>, params: &ControlParams<F>) -> F {
    let two = F::lit(2.0);
    let denom = two * (F::one() + sol.beta * sol.v2);
    let constant = F::one() - params.gamma / denom;
    let raw = if g == F::zero() {
        constant
    } else {
        constant + sol.beta * (two * sol.v2 * params.m() + sol.v1) / denom / g
    };
    clip(raw, params.lambda_lower, F::one())
}

/// Constant part of the feedback policy, clipped.
pub fn feedback_constant<F: Scalar>(sol: &RiccatiSolution<F>, params: &ControlParams<F>) -> F {
    feedback_lambda(F::zero(), sol, params)
}

/// Small-`Δt` optimal activeness `(1 + √(1+2γ)) / (1 + γ + √(1+2γ))`.
pub fn lambda_star<F: Scalar>(gamma: F) -> F {
    let root = (F::one() + F::lit(2.0) * gamma).sqrt();
    (F::one() + root) / (F::one() + gamma + root)
}

/// Leading-order stationary loss `((1-λ)² + γλ) / (λ(2-λ))`, in units of
/// `σ²Δt`.
pub fn stationary_loss<F: Scalar>(lambda: F, gamma: F) -> F {
    let u = F::one() - lambda;
    (u * u + gamma * lambda) / (lambda * (F::lit(2.0) - lambda))
}
