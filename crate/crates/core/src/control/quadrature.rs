use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gauss–Hermite rule for `∫ f(x) e^{-x²} dx ≈ Σ w_k f(x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite<F> {
    pub nodes: Vec<F>,
    pub weights: Vec<F>,
}

impl<F: Scalar> GaussHermite<F> {
    /// Nodes and weights for `E[f(Z)]`, `Z ~ N(mean, sd²)`.
    pub fn normal(&self, mean: F, sd: F) -> Vec<(F, F)> {
        let scale = sd * F::SQRT_2();
        let norm = F::one() / F::PI().sqrt();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mean + scale * x, w * norm))
            .collect()
    }
}

/// `n`-point Gauss–Hermite rule, by Newton iteration on the orthonormal
/// Hermite recurrence. Computed in `f64` and converted.
pub fn gauss_hermite<F: Scalar>(n: usize) -> Result<GaussHermite<F>> {
    if n == 0 {
        return Err(Error::out_of_range("quadrature nodes", 0.0, "[1, inf)"));
    }
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        // initial guesses for the largest roots, then from the previous ones
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut derivative = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            derivative = (2.0 * nf).sqrt() * p2;
            let step = p1 / derivative;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: 100,
                change: f64::NAN,
            });
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (derivative * derivative);
        weights[n - 1 - i] = weights[i];
    }
    nodes.reverse();
    weights.reverse();
    Ok(GaussHermite {
        nodes: nodes.into_iter().map(F::lit).collect(),
        weights: weights.into_iter().map(F::lit).collect(),
    })
}
