use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

/// Seeded stream of Gaussian log-price increments `N(mean, scale²)`.
///
/// ChaCha8 seeded through `seed_from_u64` feeds the ziggurat normal sampler;
/// both are platform independent, so a seed pins the path on every target.
#[derive(Debug, Clone)]
pub struct InnovationStream<F> {
    rng: ChaCha8Rng,
    mean: F,
    scale: F,
}

impl<F: Scalar> InnovationStream<F> {
    pub fn new(seed: u64, mean: F, scale: F) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            mean,
            scale,
        }
    }

    /// Increments `N(μΔt, σ²Δt)`.
    pub fn gbm(seed: u64, mu: F, sigma: F, dt: F) -> Self {
        Self::new(seed, mu * dt, sigma * dt.sqrt())
    }

    pub fn standard_normal(&mut self) -> F {
        let z: f64 = self.rng.sample(StandardNormal);
        F::lit(z)
    }

    pub fn next_increment(&mut self) -> F {
        let z = self.standard_normal();
        self.mean + self.scale * z
    }
}

impl<F: Scalar> Iterator for InnovationStream<F> {
    type Item = F;

    fn next(&mut self) -> Option<F> {
        Some(self.next_increment())
    }
}
