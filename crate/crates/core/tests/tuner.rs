use bootlasso::data::diabetes;
use bootlasso::lasso::{fit_path, SolverOptions};
use bootlasso::tuner::{
    compute_ebic, kfold_partition, run_exact_kfold_cv, run_weighted_bootstrap, select_lambda_ebic, CvConfig, GridSpec,
    SelectionRule, TuningConfig, WeightNormalization,
};
use bootlasso::weights::{replicate_rng, WeightScheme};
use bootlasso::{standardize, Dataset};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small standardized problem with a sparse signal.
fn toy(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 0]] - x[[i, 1]] + 0.3 * rng.random_range(-1.0..1.0));
    standardize(&x, &y).unwrap()
}

fn small_grid() -> GridSpec {
    GridSpec { k: 30, ratio: 0.001 }
}

#[test]
fn forced_half_weights_reduce_to_a_half_weight_fit() {
    let data = toy(40, 5, 1);
    let mut cfg = TuningConfig::new(WeightScheme::Beta { a: 1e6, b: 1e6 }, 1, 3);
    cfg.rules = vec![SelectionRule::Min];
    cfg.grid = small_grid();
    cfg.normalization = WeightNormalization::Raw;
    let result = run_weighted_bootstrap(&data, &cfg).unwrap();

    let half = Array1::from_elem(data.n(), 0.5);
    let path = fit_path(&data, half.view(), &result.curve.lambdas, &SolverOptions::default()).unwrap();
    let pred = path.predictions(&data);
    let rss: Vec<f64> = (0..path.len())
        .map(|k| data.y().iter().zip(pred.column(k)).map(|(y, f)| (y - f).powi(2)).sum())
        .collect();
    for (k, r) in rss.iter().enumerate() {
        let got = result.curve.total_mspe[k];
        assert!(
            (got - 0.5 * r).abs() <= 1e-3 * r.max(1.0),
            "grid {k}: {got} vs {}",
            0.5 * r
        );
    }
    // The minimizing grid point of the brute-force curve (largest lambda on ties).
    let best = rss.iter().cloned().fold(f64::INFINITY, f64::min);
    let expect = rss.iter().position(|r| *r <= best * (1.0 + 1e-9)).unwrap();
    assert_eq!(result.min.index, expect);
}

#[test]
fn paired_in_bag_rows_do_not_score() {
    let data = toy(30, 4, 2);
    let mut cfg = TuningConfig::new(WeightScheme::Paired, 5, 8);
    cfg.grid = small_grid();
    let result = run_weighted_bootstrap(&data, &cfg).unwrap();
    for r in 0..5 {
        let d = WeightScheme::Paired
            .draw(30, &mut replicate_rng(8, r as u64), r)
            .unwrap();
        let oob = d.w.iter().filter(|w| **w == 0.0).count() as f64;
        assert_eq!(result.curve.test_mass[r], oob);
    }
}

#[test]
fn totals_audit_against_the_replicate_matrix() {
    let data = toy(50, 6, 3);
    let mut cfg = TuningConfig::new(WeightScheme::Beta { a: 2.0, b: 2.0 }, 12, 4);
    cfg.grid = small_grid();
    let r = run_weighted_bootstrap(&data, &cfg).unwrap();
    let sums = r.curve.per_replicate_sse.sum_axis(ndarray::Axis(0));
    assert_eq!(sums, r.curve.total_mspe);
    assert_eq!(r.b_effective + r.discarded_replicates, 12);
    assert!(r.lambda_one_se.unwrap() >= r.lambda_min);
    assert!(r.curve.total_mspe.iter().all(|v| *v >= 0.0));
    assert!(r.curve.se.iter().all(|v| *v >= 0.0));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let data = diabetes();
    let mut cfg = TuningConfig::new(WeightScheme::MOutOfN { m: 221 }, 16, 11);
    cfg.grid = small_grid();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_weighted_bootstrap(&data, &cfg).unwrap())
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(one.curve, many.curve);
    assert_eq!(one.min, many.min);
    assert_eq!(one.one_se, many.one_se);
}

#[test]
fn cv_results_do_not_depend_on_thread_count() {
    let data = toy(60, 5, 5);
    let mut cfg = CvConfig::new(5, 3, 2);
    cfg.grid = small_grid();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_exact_kfold_cv(&data, &cfg).unwrap())
    };
    assert_eq!(run(1).curve, run(3).curve);
}

#[test]
fn leave_one_out_tests_single_rows() {
    let data = toy(15, 3, 6);
    let mut cfg = CvConfig::new(15, 4, 1);
    cfg.grid = small_grid();
    let r = run_exact_kfold_cv(&data, &cfg).unwrap();
    assert_eq!(r.curve.replicates(), 15);
    assert!(r.curve.test_mass.iter().all(|m| *m == 1.0));
    assert!(r.lambda_one_se.unwrap() >= r.lambda_min);
}

#[test]
fn folds_partition_the_rows() {
    for (n, k) in [(10, 3), (442, 10), (7, 7)] {
        let folds = kfold_partition(n, k, &mut replicate_rng(9, 0)).unwrap();
        assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

#[test]
fn ebic_formula_and_properties() {
    let data = toy(40, 8, 7);
    let grid = GridSpec::default().build(&data, false).unwrap();
    let path = fit_path(&data, Array1::ones(40).view(), &grid, &SolverOptions::default()).unwrap();
    let scores = compute_ebic(&data, &path, 1.0);
    assert_eq!(scores.len(), grid.len());

    // The first grid point is the empty model.
    let rss0: f64 = data.y().iter().map(|y| y * y).sum();
    assert!((scores[0] - 40.0 * (rss0 / 40.0).ln()).abs() < 1e-9);

    // Independent evaluation at every point.
    let pred = path.predictions(&data);
    for (k, score) in scores.iter().enumerate() {
        let rss: f64 = data.y().iter().zip(pred.column(k)).map(|(y, f)| (y - f).powi(2)).sum();
        let df = path.betas.row(k).iter().filter(|b| **b != 0.0).count() as f64;
        let expect = 40.0 * (rss / 40.0).ln() + df * 40f64.ln() + 2.0 * df * 8f64.ln();
        assert!((score - expect).abs() < 1e-9);
    }

    // gamma = 0 gives BIC; gamma only adds a size penalty.
    let bic = compute_ebic(&data, &path, 0.0);
    let ebic_half = compute_ebic(&data, &path, 0.5);
    for k in 0..grid.len() {
        assert!(bic[k] <= ebic_half[k] && ebic_half[k] <= scores[k]);
    }
    let chosen = select_lambda_ebic(&scores);
    assert!(scores.iter().all(|s| *s >= scores[chosen]));
}

#[test]
fn invalid_configs_are_rejected() {
    let data = toy(20, 3, 8);
    let cfg = TuningConfig::new(WeightScheme::Beta { a: 1.0, b: 1.0 }, 0, 0);
    assert!(run_weighted_bootstrap(&data, &cfg).is_err());
    let cfg = TuningConfig::new(WeightScheme::KFold { k: 30 }, 5, 0);
    assert!(run_weighted_bootstrap(&data, &cfg).is_err());
    let raw = Dataset::new(Array2::eye(3), Array1::from(vec![1.0, 2.0, 3.0])).unwrap();
    let cfg = TuningConfig::new(WeightScheme::Paired, 5, 0);
    assert!(run_weighted_bootstrap(&raw, &cfg).is_err());
    assert!(run_exact_kfold_cv(&data, &CvConfig::new(1, 1, 0)).is_err());
    assert!(run_exact_kfold_cv(&data, &CvConfig::new(21, 1, 0)).is_err());
}
