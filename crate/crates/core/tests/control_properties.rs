use paamm::control::{value_iteration_oracle, GridSpec};
use paamm::{feedback_lambda, lambda_star, solve_riccati, stationary_loss, ControlParams64, Error};
use proptest::prelude::*;

fn discriminant(gamma: f64, beta: f64) -> f64 {
    (1.0 - beta * gamma).powi(2) - beta * (gamma * gamma - 4.0 * gamma)
}

#[test]
fn riccati_residuals_on_the_log_grid() {
    for beta in [0.9, 0.99, 0.999, 1.0] {
        for k in 0..=120 {
            let gamma = 10f64.powf(-3.0 + 6.0 * k as f64 / 120.0);
            let p = ControlParams64::with_beta(gamma, beta, 0.01, 0.1, 0.5, 0.05).unwrap();
            match solve_riccati(&p) {
                Ok(sol) => {
                    let r = sol.residuals(&p);
                    assert!(r.v2 <= 1e-12 && r.v1 <= 1e-12, "β={beta} γ={gamma}: {r:?}");
                    assert!(r.v0.map_or(beta == 1.0, |v| v <= 1e-12), "β={beta} γ={gamma}: {r:?}");
                    assert!(sol.v2 > 0.0);
                }
                Err(Error::NegativeDiscriminant(_)) => assert!(discriminant(gamma, beta) < 0.0),
                Err(e) => panic!("β={beta} γ={gamma}: {e}"),
            }
        }
    }
}

#[test]
fn lambda_star_is_strictly_decreasing() {
    let values: Vec<f64> = (0..1000).map(|i| lambda_star(10.0 * i as f64 / 999.0)).collect();
    assert_eq!(values[0], 1.0);
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    assert!(lambda_star(1e8) < 1e-3);
}

#[test]
fn undiscounted_feedback_tends_to_lambda_star() {
    for gamma in [0.5, 1.0, 4.0, 9.0] {
        let p = ControlParams64::with_beta(gamma, 1.0, 1e-4, 0.0, 1.0, 0.01).unwrap();
        let sol = solve_riccati(&p).unwrap();
        assert!((feedback_lambda(0.01, &sol, &p) - lambda_star(gamma)).abs() < 1e-14);
    }
}

proptest! {
    #[test]
    fn loss_argmin_is_scale_invariant(gamma in 0.0f64..50.0, scale in 1e-6f64..1e6) {
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let argmin = |f: &dyn Fn(f64) -> f64| {
            grid.iter().copied().min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap()
        };
        let plain = argmin(&|l| stationary_loss(l, gamma));
        let scaled = argmin(&|l| scale * stationary_loss(l, gamma));
        prop_assert_eq!(plain, scaled);
        prop_assert!((plain - lambda_star(gamma)).abs() <= 0.01);
    }
}

#[test]
fn oracle_agrees_with_closed_form_with_drift() {
    let p = ControlParams64::with_beta(2.0, 0.98, 1e-4, 2.0, 1.0, 0.05).unwrap();
    let ric = solve_riccati(&p).unwrap();
    let states = GridSpec::stationary_states(&p, &ric, 10.0, 80).unwrap();
    let actions = GridSpec::actions(&p, 0.01).unwrap();
    let sol = value_iteration_oracle(&p, &states, &actions).unwrap();
    let [_, _, v2] = sol.fit_quadratic(sol.inner_half()).unwrap();
    assert!((v2 / ric.v2 - 1.0).abs() < 0.01, "{v2} vs {}", ric.v2);
    for i in sol.inner_half() {
        let greedy = 1.0 - sol.actions[sol.policy[i]];
        let closed = feedback_lambda(sol.states[i], &ric, &p);
        assert!(
            (greedy - closed).abs() <= sol.action_step() + 1e-12,
            "g = {}",
            sol.states[i]
        );
    }
}
