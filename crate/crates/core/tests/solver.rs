use bootlasso::data::diabetes;
use bootlasso::lasso::{
    compute_lambda_grid, fit_path, weighted_lasso_fit, CoordinateDescent, SolverOptions, WeightedGram,
};
use bootlasso::{standardize, Dataset};
use ndarray::{Array1, Array2, ArrayView1};
use proptest::prelude::*;

fn objective(data: &Dataset, w: &Array1<f64>, beta: ArrayView1<f64>, b0: f64, lambda: f64) -> f64 {
    let r = data.y() - &data.x().dot(&beta) - b0;
    (w * &r * &r).sum() + lambda * beta.mapv(f64::abs).sum()
}

/// Largest violation of the subgradient conditions, computed from scratch.
fn kkt(data: &Dataset, w: &Array1<f64>, beta: ArrayView1<f64>, b0: f64, lambda: f64) -> f64 {
    let r = data.y() - &data.x().dot(&beta) - b0;
    let wr = w * &r;
    (0..data.p())
        .map(|j| {
            let g = 2.0 * data.x().column(j).dot(&wr);
            if beta[j] != 0.0 {
                (g - lambda * beta[j].signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn instance() -> impl Strategy<Value = (Dataset, Array1<f64>)> {
    (5usize..40, 1usize..8).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(-2.0f64..2.0, n * p),
            prop::collection::vec(-1.0f64..1.0, p),
            prop::collection::vec(-0.5f64..0.5, n),
            prop::collection::vec(prop_oneof![Just(0.0), 0.05f64..2.0], n),
        )
            .prop_filter_map("degenerate instance", move |(xs, beta, noise, w)| {
                let x = Array2::from_shape_vec((n, p), xs).ok()?;
                let y = x.dot(&Array1::from(beta)) + Array1::from(noise);
                let data = standardize(&x, &y).ok()?;
                let w = Array1::from(w);
                (w.iter().filter(|v| **v > 0.0).count() >= 2).then_some((data, w))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_points_satisfy_kkt((data, w) in instance()) {
        let grid = compute_lambda_grid(&data, 30, 0.001).unwrap();
        let path = fit_path(&data, w.view(), &grid, &SolverOptions::default()).unwrap();
        for (k, &l) in grid.iter().enumerate() {
            let v = kkt(&data, &w, path.betas.row(k), path.intercepts[k], l);
            prop_assert!(v <= 1e-6, "lambda index {k}: violation {v}");
        }
    }

    #[test]
    fn sweeps_never_increase_objective((data, w) in instance(), frac in 0.001f64..1.0) {
        let system = WeightedGram::new(&data, w.view(), false).unwrap();
        let lambda = frac * system.lambda_max();
        let mut cd = CoordinateDescent::new(&system, None);
        let mut prev = objective(&data, &w, cd.beta().view(), 0.0, lambda);
        for _ in 0..50 {
            cd.sweep(lambda);
            let now = objective(&data, &w, cd.beta().view(), 0.0, lambda);
            prop_assert!(now <= prev + 1e-9 * prev.abs().max(1.0), "{now} > {prev}");
            prev = now;
        }
    }

    #[test]
    fn zero_weight_rows_are_invisible((data, w) in instance(), frac in 0.001f64..1.0) {
        let keep: Vec<usize> = (0..data.n()).filter(|&i| w[i] > 0.0).collect();
        let sub = data.select_rows(&keep);
        let w_sub = Array1::from_iter(keep.iter().map(|&i| w[i]));
        let system = WeightedGram::new(&data, w.view(), false).unwrap();
        let lambda = frac * system.lambda_max();
        let opts = SolverOptions::default();
        let full = weighted_lasso_fit(&data, w.view(), lambda, None, &opts).unwrap();
        let reduced = weighted_lasso_fit(&sub, w_sub.view(), lambda, None, &opts).unwrap();
        for (a, b) in full.beta.iter().zip(reduced.beta.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn scaling_weights_and_penalty_together_is_invariant((data, w) in instance(), c in 0.1f64..10.0) {
        let grid = compute_lambda_grid(&data, 20, 0.01).unwrap();
        let scaled: Vec<f64> = grid.iter().map(|l| c * l).collect();
        let opts = SolverOptions::default();
        let a = fit_path(&data, w.view(), &grid, &opts).unwrap();
        let b = fit_path(&data, (&w * c).view(), &scaled, &opts).unwrap();
        for (x, y) in a.betas.iter().zip(b.betas.iter()) {
            prop_assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn warm_and_cold_starts_agree((data, w) in instance(), frac in 0.001f64..1.0) {
        let grid = compute_lambda_grid(&data, 25, 0.001).unwrap();
        let opts = SolverOptions::default();
        let path = fit_path(&data, w.view(), &grid, &opts).unwrap();
        let k = ((1.0 - frac) * 24.0).round() as usize;
        let cold = weighted_lasso_fit(&data, w.view(), grid[k], None, &opts).unwrap();
        let warm = objective(&data, &w, path.betas.row(k), 0.0, grid[k]);
        let fresh = objective(&data, &w, cold.beta.view(), 0.0, grid[k]);
        prop_assert!((warm - fresh).abs() <= 1e-7 * fresh.max(1.0), "{warm} vs {fresh}");
    }
}

#[test]
fn univariate_closed_form() {
    // With a single column the minimizer is soft(2 x'Wy, lambda) / (2 x'Wx).
    let x = Array2::from_shape_vec((5, 1), vec![1.0, -2.0, 0.5, 3.0, -1.0]).unwrap();
    let y = Array1::from(vec![2.0, -3.0, 1.0, 7.0, -2.5]);
    let w = Array1::from(vec![1.0, 0.5, 2.0, 0.25, 1.5]);
    let data = Dataset::new(x.clone(), y.clone()).unwrap();
    let xwy: f64 = (0..5).map(|i| w[i] * x[[i, 0]] * y[i]).sum();
    let xwx: f64 = (0..5).map(|i| w[i] * x[[i, 0]] * x[[i, 0]]).sum();
    for lambda in [0.0, 1.0, 5.0, 2.0 * xwy - 1e-3, 2.0 * xwy + 1.0] {
        let expect = (2.0 * xwy - lambda).max(0.0) / (2.0 * xwx);
        let fit = weighted_lasso_fit(&data, w.view(), lambda, None, &SolverOptions::default()).unwrap();
        assert!(
            (fit.beta[0] - expect).abs() < 1e-12,
            "lambda {lambda}: {} vs {expect}",
            fit.beta[0]
        );
    }
}

#[test]
fn diabetes_path_passes_kkt_everywhere() {
    let data = diabetes();
    let w = Array1::ones(data.n());
    let grid = compute_lambda_grid(&data, 100, 0.001).unwrap();
    let path = fit_path(&data, w.view(), &grid, &SolverOptions::default()).unwrap();
    assert!(path.betas.row(0).iter().all(|b| *b == 0.0));
    let sizes: Vec<usize> = (0..5)
        .map(|k| path.betas.row(k).iter().filter(|b| **b != 0.0).count())
        .collect();
    assert!(sizes.windows(2).all(|s| s[0] <= s[1]), "{sizes:?}");
    for (k, &l) in grid.iter().enumerate() {
        let v = kkt(&data, &w, path.betas.row(k), path.intercepts[k], l);
        assert!(v <= 1e-6, "grid point {k}: {v}");
    }
}

#[test]
fn intercept_fit_matches_centered_problem() {
    let x = Array2::from_shape_vec((6, 2), vec![1.0, 0.0, 2.0, 1.0, 3.0, 0.0, 4.0, 1.0, 5.0, 0.0, 6.0, 1.0]).unwrap();
    let y = Array1::from(vec![10.1, 11.9, 14.2, 15.8, 18.1, 19.9]);
    let data = Dataset::new(x, y).unwrap();
    let w = Array1::from(vec![1.0, 2.0, 1.0, 0.5, 1.0, 1.0]);
    let opts = SolverOptions {
        intercept: true,
        ..Default::default()
    };
    let fit = weighted_lasso_fit(&data, w.view(), 0.5, None, &opts).unwrap();
    // The intercept is unpenalized: the weighted residuals sum to zero.
    let r = data.y() - &data.x().dot(&fit.beta) - fit.intercept;
    assert!((&w * &r).sum().abs() < 1e-8);
    assert!(kkt(&data, &w, fit.beta.view(), fit.intercept, 0.5) <= 1e-6);
}
