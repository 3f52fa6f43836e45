//! Brute-force solution of the Bellman equation on a state × action grid.
//!
//! Expectations over the Gaussian innovation use Gauss–Hermite quadrature;
//! `V` off the grid comes from 3-point Lagrange interpolation of the
//! nearest grid values, extrapolating from the outermost three points
//! beyond the ends. Both are exact for quadratic `V`. The fixed point is
//! found by policy iteration and then confirmed by Bellman sweeps until the
//! sup-norm change is below the tolerance.

use super::quadrature::gauss_hermite;
use super::{ControlParams, RiccatiSolution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `points` equally spaced values from `lower` to `upper` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<F> {
    pub lower: F,
    pub upper: F,
    pub points: usize,
}

impl<F: Scalar> GridSpec<F> {
    pub fn new(lower: F, upper: F, points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::out_of_range("grid points", points as f64, "[3, inf)"));
        }
        if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::out_of_range("grid upper bound", upper.as_f64(), "(lower, inf)"));
        }
        Ok(Self { lower, upper, points })
    }

    pub fn symmetric(half_width: F, points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, points)
    }

    /// State grid of `±std_devs` stationary standard deviations of the gap
    /// under the constant activeness of `sol`, with an even point count so
    /// that `g = 0` is not a node.
    pub fn stationary_states(
        params: &ControlParams<F>,
        sol: &RiccatiSolution<F>,
        std_devs: F,
        points: usize,
    ) -> Result<Self> {
        let lambda = super::feedback_constant(sol, params);
        let variance = params.sigma * params.sigma * params.dt / (lambda * (F::lit(2.0) - lambda));
        let sd = variance.sqrt().max(params.m().abs() / lambda);
        if !(sd > F::zero()) {
            return Err(Error::out_of_range("innovation scale", 0.0, "(0, inf)"));
        }
        Self::symmetric(std_devs * sd, points + points % 2)
    }

    /// Action grid `u = 1 - λ ∈ [0, 1 - λ̲]` with spacing `step` or finer.
    pub fn actions(params: &ControlParams<F>, step: F) -> Result<Self> {
        let width = F::one() - params.lambda_lower;
        let intervals = (width / step).ceil().to_usize().unwrap_or(0).max(2);
        Self::new(F::zero(), width, intervals + 1)
    }

    pub fn step(&self) -> F {
        (self.upper - self.lower) / F::from_count(self.points - 1)
    }

    pub fn values(&self) -> Vec<F> {
        let h = self.step();
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.upper
                } else {
                    self.lower + h * F::from_count(i)
                }
            })
            .collect()
    }
}

/// Convergence controls of the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings<F> {
    /// Sup-norm change of a Bellman sweep that counts as converged.
    pub tolerance: F,
    /// Cap on policy-iteration rounds plus Bellman sweeps.
    pub max_iterations: usize,
    pub quadrature_nodes: usize,
}

impl<F: Scalar> Default for OracleSettings<F> {
    fn default() -> Self {
        Self {
            tolerance: F::lit(1e-10),
            max_iterations: 100_000,
            quadrature_nodes: 48,
        }
    }
}

/// Value and greedy policy tables.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution<F> {
    pub states: Vec<F>,
    pub values: Vec<F>,
    /// Action grid `u`.
    pub actions: Vec<F>,
    /// Index into `actions` of the greedy action at each state.
    pub policy: Vec<usize>,
    pub iterations: usize,
    pub final_change: F,
}

impl<F: Scalar> OracleSolution<F> {
    pub fn action_step(&self) -> F {
        self.actions[1] - self.actions[0]
    }

    /// Greedy activeness `1 - u` at each state.
    pub fn policy_lambda(&self) -> Vec<F> {
        self.policy.iter().map(|&j| F::one() - self.actions[j]).collect()
    }

    /// Index range of the middle half of the state grid.
    pub fn inner_half(&self) -> std::ops::Range<usize> {
        let n = self.states.len();
        n / 4..n - n / 4
    }

    /// Least-squares `[c0, c1, c2]` of `V ≈ c0 + c1 g + c2 g²` over the
    /// states in `range`.
    pub fn fit_quadratic(&self, range: std::ops::Range<usize>) -> Result<[F; 3]> {
        let scale = self.states[range.clone()]
            .iter()
            .fold(F::zero(), |acc, g| acc.max(g.abs()));
        if !(scale > F::zero()) {
            return Err(Error::SingularSystem);
        }
        let mut normal = vec![vec![F::zero(); 3]; 3];
        let mut rhs = vec![F::zero(); 3];
        for i in range {
            let t = self.states[i] / scale;
            let basis = [F::one(), t, t * t];
            for r in 0..3 {
                rhs[r] = rhs[r] + basis[r] * self.values[i];
                for c in 0..3 {
                    normal[r][c] = normal[r][c] + basis[r] * basis[c];
                }
            }
        }
        let c = solve_dense(normal, rhs)?;
        Ok([c[0], c[1] / scale, c[2] / (scale * scale)])
    }
}

/// Solves the Bellman equation with the default settings.
pub fn value_iteration_oracle<F: Scalar>(
    params: &ControlParams<F>,
    state_grid: &GridSpec<F>,
    action_grid: &GridSpec<F>,
) -> Result<OracleSolution<F>> {
    value_iteration_oracle_with(params, state_grid, action_grid, &OracleSettings::default())
}

/// Interpolation stencil of one evaluation point: first grid index and
/// the three Lagrange weights.
#[derive(Debug, Clone, Copy)]
struct Stencil<F> {
    first: usize,
    weights: [F; 3],
}

fn stencil<F: Scalar>(grid: &GridSpec<F>, x: F) -> Stencil<F> {
    let h = grid.step();
    let pos = (x - grid.lower) / h;
    let nearest = pos
        .round()
        .to_i64()
        .unwrap_or(if pos > F::zero() { i64::MAX } else { i64::MIN });
    let first = (nearest - 1).clamp(0, grid.points as i64 - 3) as usize;
    let t = pos - F::from_count(first);
    let (one, two) = (F::one(), F::lit(2.0));
    Stencil {
        first,
        weights: [(t - one) * (t - two) / two, -t * (t - two), t * (t - one) / two],
    }
}

struct Problem<F> {
    beta: F,
    gamma: F,
    states: Vec<F>,
    actions: Vec<F>,
    quadrature: Vec<(F, F)>,
    grid: GridSpec<F>,
}

impl<F: Scalar> Problem<F> {
    fn cost(&self, u: F, g: F) -> F {
        (u * u - self.gamma * u + self.gamma) * g * g
    }

    /// Sparse transition row for action `u` at state `g`: `E[V(ug + ε)]`
    /// as a weighted sum of grid values.
    fn transition(&self, u: F, g: F, row: &mut Vec<(usize, F)>) {
        row.clear();
        for &(eps, w) in &self.quadrature {
            let s = stencil(&self.grid, u * g + eps);
            for (k, &lw) in s.weights.iter().enumerate() {
                row.push((s.first + k, w * lw));
            }
        }
    }

    fn q_value(&self, u: F, g: F, values: &[F], row: &mut Vec<(usize, F)>) -> F {
        self.transition(u, g, row);
        let expect = row.iter().fold(F::zero(), |acc, &(i, w)| acc + w * values[i]);
        self.cost(u, g) + self.beta * expect
    }

    /// Bellman operator: new values and greedy action indices. Ties go to
    /// the smallest `u`.
    fn bellman(&self, values: &[F]) -> (Vec<F>, Vec<usize>) {
        let mut row = Vec::new();
        let mut out = Vec::with_capacity(self.states.len());
        let mut policy = Vec::with_capacity(self.states.len());
        for &g in &self.states {
            let mut best = (F::infinity(), 0);
            for (j, &u) in self.actions.iter().enumerate() {
                let q = self.q_value(u, g, values, &mut row);
                if q < best.0 {
                    best = (q, j);
                }
            }
            out.push(best.0);
            policy.push(best.1);
        }
        (out, policy)
    }

    /// Exact value of a fixed policy: solves `(I - βP) V = c`.
    fn evaluate(&self, policy: &[usize]) -> Result<Vec<F>> {
        let n = self.states.len();
        let mut matrix = vec![vec![F::zero(); n]; n];
        let mut rhs = vec![F::zero(); n];
        let mut row = Vec::new();
        for (i, &g) in self.states.iter().enumerate() {
            let u = self.actions[policy[i]];
            self.transition(u, g, &mut row);
            matrix[i][i] = F::one();
            for &(k, w) in &row {
                matrix[i][k] = matrix[i][k] - self.beta * w;
            }
            rhs[i] = self.cost(u, g);
        }
        solve_dense(matrix, rhs)
    }
}

/// Solves `V(g) = min_u {(u² - γu + γ) g² + β E[V(ug + ε)]}` on the grid.
pub fn value_iteration_oracle_with<F: Scalar>(
    params: &ControlParams<F>,
    state_grid: &GridSpec<F>,
    action_grid: &GridSpec<F>,
    settings: &OracleSettings<F>,
) -> Result<OracleSolution<F>> {
    params.validate()?;
    let beta = params.beta();
    if !(beta < F::one()) {
        return Err(Error::out_of_range("beta", beta.as_f64(), "(0, 1) for the oracle"));
    }
    let max_u = F::one() - params.lambda_lower;
    let slack = F::epsilon() * F::lit(16.0);
    if action_grid.lower < -slack || action_grid.upper > max_u + slack {
        return Err(Error::out_of_range(
            "action grid bound",
            action_grid.upper.as_f64(),
            "[0, 1 - lambda_lower]",
        ));
    }
    let sd = params.sigma * params.dt.sqrt();
    let problem = Problem {
        beta,
        gamma: params.gamma,
        states: state_grid.values(),
        actions: action_grid.values(),
        quadrature: gauss_hermite::<F>(settings.quadrature_nodes)?.normal(params.m(), sd),
        grid: *state_grid,
    };

    let mut policy = vec![0usize; problem.states.len()];
    let mut values = problem.evaluate(&policy)?;
    let mut iterations = 0;
    let mut change = F::infinity();
    let mut policy_stable = false;
    while iterations < settings.max_iterations {
        iterations += 1;
        let (next, greedy) = problem.bellman(&values);
        change = next
            .iter()
            .zip(&values)
            .fold(F::zero(), |acc, (a, b)| acc.max((*a - *b).abs()));
        if change < settings.tolerance {
            values = next;
            policy = greedy;
            return Ok(OracleSolution {
                states: problem.states,
                values,
                actions: problem.actions,
                policy,
                iterations,
                final_change: change,
            });
        }
        if !policy_stable && greedy != policy {
            policy = greedy;
            values = problem.evaluate(&policy)?;
        } else {
            // policy iteration has settled; finish with plain sweeps
            policy_stable = true;
            policy = greedy;
            values = next;
        }
    }
    Err(Error::NoConvergence {
        iterations,
        change: change.as_f64(),
    })
}

/// Gaussian elimination with partial pivoting.
fn solve_dense<F: Scalar>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Result<Vec<F>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or(Error::SingularSystem)?;
        if !(a[pivot][col].abs() > F::zero()) {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (head, tail) = a.split_at_mut(col + 1);
        let pivot_row = &head[col];
        for (offset, row) in tail.iter_mut().enumerate() {
            let factor = row[col] / pivot_row[col];
            if factor == F::zero() {
                continue;
            }
            for k in col..n {
                row[k] = row[k] - factor * pivot_row[k];
            }
            b[col + 1 + offset] = b[col + 1 + offset] - factor * b[col];
        }
    }
    let mut x = vec![F::zero(); n];
    for i in (0..n).rev() {
        let tail = ((i + 1)..n).fold(F::zero(), |acc, k| acc + a[i][k] * x[k]);
        x[i] = (b[i] - tail) / a[i][i];
    }
    Ok(x)
}
