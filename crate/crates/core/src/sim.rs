//! Simulation study: fit a truth model on a seed dataset, regenerate
//! Gaussian responses around it and compare how every tuning scheme selects
//! the penalty.

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::active_set_mcc;
use crate::lasso::{fit_path, weighted_lasso_fit, SolverOptions};
use crate::tuner::{
    compute_ebic, run_exact_kfold_cv_on_grid, run_weighted_bootstrap_on_grid, select_lambda_ebic, CvConfig, GridSpec,
    SelectionRule, TuningConfig, TuningResult, WeightNormalization,
};
use crate::weights::{derive_seed, replicate_rng, SchemeFlag};

const NOISE_TAG: u64 = 0x5EED_0001;
const TRUTH_TAG: u64 = 0x5EED_0002;

/// How the truth coefficients are obtained from the seed dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthRule {
    /// Repeated exact k-fold CV, min rule, median across repeats.
    RepeatedCv {
        k: usize,
        repeats: usize,
    },
    /// Weighted bootstrap, min rule.
    Bootstrap {
        scheme: SchemeFlag,
        b: usize,
    },
    FixedLambda(f64),
}

impl Default for TruthRule {
    fn default() -> Self {
        TruthRule::RepeatedCv { k: 10, repeats: 10 }
    }
}

impl std::fmt::Display for TruthRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruthRule::RepeatedCv { k, repeats } => write!(f, "cv:{k}x{repeats}"),
            TruthRule::Bootstrap { scheme, b } => write!(f, "bootstrap:{scheme}x{b}"),
            TruthRule::FixedLambda(l) => write!(f, "lambda:{l}"),
        }
    }
}

impl std::str::FromStr for TruthRule {
    type Err = Error;

    /// `cv:KxR`, `lambda:VALUE` or `bootstrap:SCHEMExB`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid truth rule '{s}'"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "cv" => {
                let (k, r) = rest.split_once('x').ok_or_else(bad)?;
                Ok(TruthRule::RepeatedCv {
                    k: k.trim().parse().map_err(|_| bad())?,
                    repeats: r.trim().parse().map_err(|_| bad())?,
                })
            }
            "lambda" => Ok(TruthRule::FixedLambda(rest.trim().parse().map_err(|_| bad())?)),
            "bootstrap" => {
                let (scheme, b) = rest.rsplit_once('x').ok_or_else(bad)?;
                Ok(TruthRule::Bootstrap {
                    scheme: scheme.parse()?,
                    b: b.trim().parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

/// Fold count of an exact-CV baseline; `Loo` resolves to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldCount {
    K(usize),
    Loo,
}

impl FoldCount {
    pub fn resolve(&self, n: usize) -> usize {
        match self {
            FoldCount::K(k) => *k,
            FoldCount::Loo => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub seed_dataset: Dataset,
    pub truth_rule: TruthRule,
    pub n_replications: usize,
    /// Weighted-bootstrap schemes swept in every replication.
    pub schemes: Vec<SchemeFlag>,
    pub kfold_baselines: Vec<FoldCount>,
    pub mofn_baselines: Vec<f64>,
    pub b: usize,
    pub cv_repeats: usize,
    pub ebic_gamma: Option<f64>,
    pub grid: GridSpec,
    pub solver: SolverOptions,
    pub normalization: WeightNormalization,
    pub seed: u64,
}

impl SimulationConfig {
    /// The default study on a given seed dataset: Beta schemes with
    /// `rho = 0.1, ..., 0.9` and `a + b = 4`, exact CV with k in
    /// {3, 5, 10, n}, m-of-n with m/n in {0.25, 0.5, 0.75, 1} and EBIC.
    pub fn new(seed_dataset: Dataset, seed: u64) -> Self {
        SimulationConfig {
            seed_dataset,
            truth_rule: TruthRule::default(),
            n_replications: 50,
            schemes: (1..=9)
                .map(|i| {
                    let rho = i as f64 / 10.0;
                    SchemeFlag::Beta {
                        a: 4.0 * rho,
                        b: 4.0 * (1.0 - rho),
                    }
                })
                .collect(),
            kfold_baselines: vec![FoldCount::K(3), FoldCount::K(5), FoldCount::K(10), FoldCount::Loo],
            mofn_baselines: vec![0.25, 0.5, 0.75, 1.0],
            b: 200,
            cv_repeats: 1,
            ebic_gamma: Some(1.0),
            grid: GridSpec::default(),
            solver: SolverOptions::default(),
            normalization: WeightNormalization::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_replications == 0 {
            return Err(Error::InvalidConfig("n_replications must be at least 1".into()));
        }
        if !self.seed_dataset.is_standardized() {
            return Err(Error::NotStandardized);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub beta: Array1<f64>,
    pub support: Vec<usize>,
    pub lambda: f64,
    /// Residual scale `sqrt(RSS / (n - |support|))` of the truth fit.
    pub sigma: f64,
}

pub fn build_truth(
    data: &Dataset,
    rule: &TruthRule,
    grid: &GridSpec,
    solver: &SolverOptions,
    normalization: WeightNormalization,
    seed: u64,
) -> Result<Truth> {
    if !data.is_standardized() {
        return Err(Error::NotStandardized);
    }
    let seed = derive_seed(seed, TRUTH_TAG);
    let lambda = match rule {
        TruthRule::FixedLambda(l) => *l,
        TruthRule::RepeatedCv { k, repeats } => {
            let cfg = CvConfig {
                k: *k,
                repeats: *repeats,
                seed,
                grid: *grid,
                rules: vec![SelectionRule::Min],
                solver: *solver,
                normalization,
            };
            crate::tuner::run_exact_kfold_cv(data, &cfg)?.lambda_min
        }
        TruthRule::Bootstrap { scheme, b } => {
            let mut cfg = TuningConfig::new(scheme.resolve(data.n())?, *b, seed);
            cfg.grid = *grid;
            cfg.rules = vec![SelectionRule::Min];
            cfg.solver = *solver;
            cfg.normalization = normalization;
            crate::tuner::run_weighted_bootstrap(data, &cfg)?.lambda_min
        }
    };
    let ones = Array1::ones(data.n());
    let fit = weighted_lasso_fit(data, ones.view(), lambda, None, solver)?;
    let support: Vec<usize> = (0..data.p()).filter(|&j| fit.beta[j] != 0.0).collect();
    if support.is_empty() {
        return Err(Error::DegenerateTruth);
    }
    let fitted = data.x().dot(&fit.beta) + fit.intercept;
    let rss: f64 = data.y().iter().zip(fitted.iter()).map(|(y, f)| (y - f).powi(2)).sum();
    let dof = data.n().saturating_sub(support.len()).max(1);
    Ok(Truth {
        beta: fit.beta,
        support,
        lambda,
        sigma: (rss / dof as f64).sqrt(),
    })
}

/// `X beta + eps` with `eps` i.i.d. `N(0, sigma^2)`.
pub fn simulate_response(data: &Dataset, beta: ArrayView1<f64>, sigma: f64, rng: &mut impl Rng) -> Result<Array1<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise scale {sigma} must be positive")));
    }
    let mut y = data.x().dot(&beta);
    for v in y.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v += sigma * z;
    }
    Ok(y)
}

/// One selected penalty of one scheme in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub scheme: String,
    pub family: &'static str,
    pub replication: usize,
    pub rule: &'static str,
    pub lambda: f64,
    pub lambda_index: usize,
    pub n_nonzero: usize,
    pub mcc: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellError {
    pub scheme: String,
    pub replication: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub truth: Truth,
    pub records: Vec<CellRecord>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: String,
    pub family: &'static str,
    pub rule: &'static str,
    pub count: usize,
    pub median_lambda: f64,
    pub q1_lambda: f64,
    pub q3_lambda: f64,
    pub median_n_nonzero: f64,
    pub median_mcc: f64,
    pub mean_rho: f64,
}

enum Cell {
    Bootstrap {
        label: String,
        family: &'static str,
        flag: SchemeFlag,
    },
    Cv {
        k: usize,
    },
    Ebic {
        gamma: f64,
    },
}

fn cells(config: &SimulationConfig, n: usize) -> Vec<Cell> {
    let mut out: Vec<Cell> = config
        .schemes
        .iter()
        .map(|s| Cell::Bootstrap {
            label: s.to_string(),
            family: match s {
                SchemeFlag::Beta { .. } => "beta",
                SchemeFlag::KFold { .. } => "kfold_weights",
                SchemeFlag::Paired => "paired",
                SchemeFlag::MOutOfN { .. } => "mofn",
            },
            flag: *s,
        })
        .collect();
    out.extend(config.kfold_baselines.iter().map(|k| Cell::Cv { k: k.resolve(n) }));
    out.extend(config.mofn_baselines.iter().map(|f| Cell::Bootstrap {
        label: format!("mofn:{f}"),
        family: "mofn",
        flag: SchemeFlag::MOutOfN { fraction: *f },
    }));
    if let Some(gamma) = config.ebic_gamma {
        out.push(Cell::Ebic { gamma });
    }
    out
}

fn records_from(
    result: &TuningResult,
    label: &str,
    family: &'static str,
    replication: usize,
    truth: &[usize],
    p: usize,
) -> Vec<CellRecord> {
    [Some(&result.min), result.one_se.as_ref()]
        .into_iter()
        .flatten()
        .map(|sel| CellRecord {
            scheme: label.to_owned(),
            family,
            replication,
            rule: sel.rule.name(),
            lambda: sel.lambda,
            lambda_index: sel.index,
            n_nonzero: sel.active_set.len(),
            mcc: active_set_mcc(&sel.active_set, truth, p),
            rho: result.rho,
        })
        .collect()
}

/// Dataset for one replication: the seed covariates with a fresh response.
pub fn replication_dataset(config: &SimulationConfig, truth: &Truth, replication: usize) -> Result<Dataset> {
    let mut rng = replicate_rng(derive_seed(config.seed, NOISE_TAG), replication as u64);
    let y = simulate_response(&config.seed_dataset, truth.beta.view(), truth.sigma, &mut rng)?;
    config.seed_dataset.with_response(y.view())
}

pub fn run_simulation_study(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let seed_data = &config.seed_dataset;
    let truth = build_truth(
        seed_data,
        &config.truth_rule,
        &config.grid,
        &config.solver,
        config.normalization,
        config.seed,
    )?;
    let n = seed_data.n();
    let p = seed_data.p();
    let plan = cells(config, n);
    let rules = vec![SelectionRule::Min, SelectionRule::OneSe];

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for rep in 0..config.n_replications {
        let data = replication_dataset(config, &truth, rep)?;
        let grid = match config.grid.build(&data, config.solver.intercept) {
            Ok(g) => g,
            Err(e) => {
                errors.push(CellError {
                    scheme: "grid".into(),
                    replication: rep,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let rep_seed = derive_seed(config.seed, rep as u64 + 1);
        for (c, cell) in plan.iter().enumerate() {
            let cell_seed = derive_seed(rep_seed, c as u64 + 1);
            let outcome: Result<Vec<CellRecord>> = match cell {
                Cell::Bootstrap { label, family, flag } => flag.resolve(n).and_then(|scheme| {
                    let cfg = TuningConfig {
                        scheme,
                        b: config.b,
                        grid: config.grid,
                        seed: cell_seed,
                        rules: rules.clone(),
                        solver: config.solver,
                        normalization: config.normalization,
                    };
                    let r = run_weighted_bootstrap_on_grid(&data, &cfg, &grid)?;
                    Ok(records_from(&r, label, family, rep, &truth.support, p))
                }),
                Cell::Cv { k } => {
                    let cfg = CvConfig {
                        k: *k,
                        repeats: config.cv_repeats,
                        seed: cell_seed,
                        grid: config.grid,
                        rules: rules.clone(),
                        solver: config.solver,
                        normalization: config.normalization,
                    };
                    run_exact_kfold_cv_on_grid(&data, &cfg, &grid)
                        .map(|r| records_from(&r, &cv_label(*k, n), "cv", rep, &truth.support, p))
                }
                Cell::Ebic { gamma } => ebic_record(&data, &grid, *gamma, &config.solver, rep, &truth.support),
            };
            match outcome {
                Ok(mut recs) => records.append(&mut recs),
                Err(e) => errors.push(CellError {
                    scheme: cell_name(cell, n),
                    replication: rep,
                    message: e.to_string(),
                }),
            }
        }
    }
    Ok(SimulationResult { truth, records, errors })
}

fn cv_label(k: usize, n: usize) -> String {
    if k == n {
        format!("cv:{k} (loocv)")
    } else {
        format!("cv:{k}")
    }
}

fn cell_name(cell: &Cell, n: usize) -> String {
    match cell {
        Cell::Bootstrap { label, .. } => label.clone(),
        Cell::Cv { k } => cv_label(*k, n),
        Cell::Ebic { gamma } => format!("ebic:{gamma}"),
    }
}

fn ebic_record(
    data: &Dataset,
    grid: &[f64],
    gamma: f64,
    solver: &SolverOptions,
    replication: usize,
    truth: &[usize],
) -> Result<Vec<CellRecord>> {
    let path = fit_path(data, Array1::ones(data.n()).view(), grid, solver)?;
    let scores = compute_ebic(data, &path, gamma);
    let idx = select_lambda_ebic(&scores);
    let active = crate::lasso::active_set(&path, idx)?;
    Ok(vec![CellRecord {
        scheme: format!("ebic:{gamma}"),
        family: "ebic",
        replication,
        rule: "min",
        lambda: grid[idx],
        lambda_index: idx,
        n_nonzero: active.len(),
        mcc: active_set_mcc(&active, truth, data.p()),
        rho: 1.0,
    }])
}

/// Type-7 sample quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Medians and quartiles per `(scheme, rule)`, in first-appearance order.
pub fn summarize(result: &SimulationResult) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, &'static str, &'static str)> = Vec::new();
    for r in &result.records {
        let key = (r.scheme.clone(), r.family, r.rule);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scheme, family, rule)| {
            let rows: Vec<&CellRecord> = result
                .records
                .iter()
                .filter(|r| r.scheme == scheme && r.rule == rule)
                .collect();
            let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
            let sizes: Vec<f64> = rows.iter().map(|r| r.n_nonzero as f64).collect();
            let mccs: Vec<f64> = rows.iter().map(|r| r.mcc).collect();
            SummaryRow {
                count: rows.len(),
                median_lambda: quantile(&lambdas, 0.5),
                q1_lambda: quantile(&lambdas, 0.25),
                q3_lambda: quantile(&lambdas, 0.75),
                median_n_nonzero: quantile(&sizes, 0.5),
                median_mcc: quantile(&mccs, 0.5),
                mean_rho: rows.iter().map(|r| r.rho).sum::<f64>() / rows.len() as f64,
                scheme,
                family,
                rule,
            }
        })
        .collect()
}
