use crate::scalar::Scalar;

/// Batch-means estimator of a stationary mean and its standard error.
///
/// Samples from a Markov chain are autocorrelated, so the naive i.i.d.
/// standard error is too small; the spread of batch averages is not.
#[derive(Debug, Clone)]
pub struct BatchMeans<F> {
    batch_size: usize,
    in_batch: usize,
    batch_sum: F,
    total: F,
    count: usize,
    batch_means: Vec<F>,
}

impl<F: Scalar> BatchMeans<F> {
    pub const DEFAULT_BATCHES: usize = 100;

    /// Accumulator for `expected` samples split into `batches` batches.
    pub fn new(expected: usize, batches: usize) -> Self {
        let batch_size = (expected / batches.max(1)).max(1);
        Self {
            batch_size,
            in_batch: 0,
            batch_sum: F::zero(),
            total: F::zero(),
            count: 0,
            batch_means: Vec::with_capacity(batches),
        }
    }

    pub fn push(&mut self, value: F) {
        self.total = self.total + value;
        self.batch_sum = self.batch_sum + value;
        self.count += 1;
        self.in_batch += 1;
        if self.in_batch == self.batch_size {
            self.batch_means.push(self.batch_sum / F::from_count(self.batch_size));
            self.batch_sum = F::zero();
            self.in_batch = 0;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> F {
        if self.count == 0 {
            F::nan()
        } else {
            self.total / F::from_count(self.count)
        }
    }

    /// Standard error of [`mean`](Self::mean) from complete batches.
    pub fn std_error(&self) -> F {
        let b = self.batch_means.len();
        if b < 2 {
            return F::nan();
        }
        let nb = F::from_count(b);
        let centre = self.batch_means.iter().fold(F::zero(), |a, &m| a + m) / nb;
        let ss = self
            .batch_means
            .iter()
            .fold(F::zero(), |a, &m| a + (m - centre) * (m - centre));
        (ss / (nb - F::one()) / nb).sqrt()
    }

    pub fn estimate(&self) -> (F, F) {
        (self.mean(), self.std_error())
    }
}

/// Monte Carlo moments of the stationary top-of-block gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate<F> {
    pub mean_gap: F,
    pub mean_std_error: F,
    pub second_moment_gap: F,
    /// Standard error of `second_moment_gap`.
    pub std_error: F,
    pub n_samples: usize,
}

impl<F: Scalar> MomentEstimate<F> {
    pub fn variance(&self) -> F {
        self.second_moment_gap - self.mean_gap * self.mean_gap
    }
}

/// A per-unit-time rate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate<F> {
    pub rate: F,
    pub std_error: F,
    pub n_samples: usize,
}
