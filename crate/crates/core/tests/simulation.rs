use bootlasso::data::diabetes;
use bootlasso::sim::{build_truth, quantile, run_simulation_study, summarize, FoldCount, SimulationConfig, TruthRule};
use bootlasso::tuner::GridSpec;
use bootlasso::weights::SchemeFlag;

fn small_config(seed: u64) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(diabetes(), seed);
    cfg.truth_rule = TruthRule::RepeatedCv { k: 5, repeats: 2 };
    cfg.n_replications = 2;
    cfg.schemes = vec![SchemeFlag::Beta { a: 1.0, b: 3.0 }, SchemeFlag::Beta { a: 3.0, b: 1.0 }];
    cfg.kfold_baselines = vec![FoldCount::K(3), FoldCount::K(10)];
    cfg.mofn_baselines = vec![0.5];
    cfg.b = 8;
    cfg.grid = GridSpec { k: 40, ratio: 0.001 };
    cfg
}

#[test]
fn study_is_deterministic_and_on_grid() {
    let cfg = small_config(5);
    let a = run_simulation_study(&cfg).unwrap();
    let b = run_simulation_study(&cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.errors.is_empty(), "{:?}", a.errors);

    // 2 replications x (2 beta + 2 cv + 1 mofn) x 2 rules + 2 EBIC rows.
    assert_eq!(a.records.len(), 2 * 5 * 2 + 2);
    for r in &a.records {
        assert!(r.lambda_index < 40);
        assert!((-1.0..=1.0).contains(&r.mcc));
    }
    let summary = summarize(&a);
    let schemes: Vec<&str> = summary.iter().map(|s| s.scheme.as_str()).collect();
    for want in ["beta:1,3", "cv:3", "cv:10", "mofn:0.5", "ebic:1"] {
        assert!(schemes.contains(&want), "{want} missing from {schemes:?}");
    }
}

#[test]
fn truth_is_sparse_with_positive_noise() {
    let data = diabetes();
    let rule = TruthRule::RepeatedCv { k: 5, repeats: 2 };
    let truth = build_truth(
        &data,
        &rule,
        &GridSpec::default(),
        &Default::default(),
        Default::default(),
        1,
    )
    .unwrap();
    assert!(!truth.support.is_empty() && truth.support.len() < data.p());
    assert!(truth.sigma > 0.0);
    for (j, b) in truth.beta.iter().enumerate() {
        assert_eq!(*b != 0.0, truth.support.contains(&j));
    }
}

#[test]
fn huge_fixed_penalty_gives_degenerate_truth() {
    let data = diabetes();
    let err = build_truth(
        &data,
        &TruthRule::FixedLambda(1e12),
        &GridSpec::default(),
        &Default::default(),
        Default::default(),
        0,
    )
    .unwrap_err();
    assert!(err.is_degenerate_data());
}

#[test]
fn truth_rules_parse_and_print() {
    for s in ["cv:10x10", "lambda:2.5", "bootstrap:beta:1,3x50"] {
        let r: TruthRule = s.parse().unwrap();
        assert_eq!(r.to_string(), s);
    }
    assert!("cv:10".parse::<TruthRule>().is_err());
}

#[test]
fn type7_quantiles() {
    let v = [4.0, 1.0, 3.0, 2.0];
    assert_eq!(quantile(&v, 0.5), 2.5);
    assert_eq!(quantile(&v, 0.25), 1.75);
    assert_eq!(quantile(&v, 1.0), 4.0);
}
