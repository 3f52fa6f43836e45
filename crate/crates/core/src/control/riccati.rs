use super::ControlParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients of the quadratic value function `V(g) = v2 g² + v1 g + v0`.
///
/// `v0` is `None` when `β = 1`: the undiscounted constant has no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiSolution<F> {
    pub v2: F,
    pub v1: F,
    pub v0: Option<F>,
    pub beta: F,
}

/// Scaled residuals of the three coefficient equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiResiduals<F> {
    /// `|βv2² + (1-βγ)v2 + γ²/4 - γ| / max(1, v2²)`.
    pub v2: F,
    /// `|v1(2 + 2βv2 - γβ) - 2γβ v2 m|`, relative to the larger side.
    pub v1: F,
    /// `|(1-β)v0 - β(v2 s2 + v1 m) + β²(2v2 m + v1)²/(4(1+βv2))|` over
    /// `max(1, |v0|)`; `None` when `v0` is.
    pub v0: Option<F>,
}

impl<F: Scalar> RiccatiSolution<F> {
    /// Value function at `g`, if `v0` exists.
    pub fn value(&self, g: F) -> Option<F> {
        self.v0.map(|v0| (self.v2 * g + self.v1) * g + v0)
    }

    /// Substitutes the coefficients back into their defining equations.
    pub fn residuals(&self, params: &ControlParams<F>) -> RiccatiResiduals<F> {
        let (two, four) = (F::lit(2.0), F::lit(4.0));
        let (beta, gamma, v2, v1) = (self.beta, params.gamma, self.v2, self.v1);
        let (m, s2) = (params.m(), params.s2());

        let r2 = beta * v2 * v2 + (F::one() - beta * gamma) * v2 + (gamma * gamma / four - gamma);
        let r2 = r2.abs() / F::one().max(v2 * v2);

        let lhs = v1 * (two + two * beta * v2 - gamma * beta);
        let rhs = two * gamma * beta * v2 * m;
        let scale = lhs.abs().max(rhs.abs());
        let r1 = if scale == F::zero() {
            F::zero()
        } else {
            (lhs - rhs).abs() / scale
        };

        let r0 = self.v0.map(|v0| {
            let k = two * v2 * m + v1;
            let rhs = beta * (v2 * s2 + v1 * m + v0) - beta * beta * k * k / (four * (F::one() + beta * v2));
            (v0 - rhs).abs() / F::one().max(v0.abs())
        });
        RiccatiResiduals { v2: r2, v1: r1, v0: r0 }
    }
}

/// Solves the coefficient equations of the Bellman equation.
///
/// `v2` is the larger root of `βv2² + (1-βγ)v2 + (γ²/4 - γ) = 0`, computed
/// without cancellation; it is non-negative for every `γ ≥ 0` with a real
/// root. Fails when the discriminant `1 + 2βγ - βγ²(1-β)` is negative.
pub fn solve_riccati<F: Scalar>(params: &ControlParams<F>) -> Result<RiccatiSolution<F>> {
    params.validate()?;
    let (two, four) = (F::lit(2.0), F::lit(4.0));
    let beta = params.beta();
    let gamma = params.gamma;

    let a = beta;
    let b = F::one() - beta * gamma;
    let c = gamma * gamma / four - gamma;
    // expanded form avoids the b² - 4ac cancellation
    let disc = F::one() + two * beta * gamma - beta * gamma * gamma * (F::one() - beta);
    if disc < F::zero() {
        return Err(Error::NegativeDiscriminant(disc.as_f64()));
    }
    let root = disc.sqrt();
    let q = -(b + if b >= F::zero() { root } else { -root }) / two;
    let v2 = if q == F::zero() {
        return Err(Error::DegenerateRiccati("b and the discriminant both vanish"));
    } else {
        // adding zero turns a -0 root into +0
        (q / a).max(c / q) + F::zero()
    };

    let m = params.m();
    let denom = two + two * beta * v2 - gamma * beta;
    let numer = two * gamma * beta * v2 * m;
    let v1 = if numer == F::zero() {
        F::zero()
    } else if denom == F::zero() {
        return Err(Error::DegenerateRiccati("v1 coefficient vanishes"));
    } else {
        numer / denom
    };

    let v0 = if beta < F::one() {
        let k = two * v2 * m + v1;
        let rhs = beta * (v2 * params.s2() + v1 * m) - beta * beta * k * k / (four * (F::one() + beta * v2));
        Some(rhs / (F::one() - beta))
    } else {
        None
    };
    Ok(RiccatiSolution { v2, v1, v0, beta })
}
