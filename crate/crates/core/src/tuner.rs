//! Penalty selection: the weighted bootstrap, exact k-fold cross-validation
//! and EBIC.
//!
//! A weighted-bootstrap run draws `b` replicate weight pairs `(w, u)`, fits
//! the Lasso path on `w` over a grid shared by every replicate and
//! accumulates the `u`-weighted squared prediction error of each grid point.
//! The verbatim aggregate is the double sum over replicates and observations.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lasso::{check_grid, compute_lambda_grid_with, fit_path, ActiveSet, LassoPath, SolverOptions};
use crate::weights::{derive_seed, replicate_rng, WeightDraw, WeightScheme};

/// Redraws allowed per replicate slot before the slot is dropped.
pub const MAX_REDRAWS: usize = 100;

const CV_SEED_TAG: u64 = 0xC5;

/// How a training weight vector is scaled before it enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightNormalization {
    /// Weights are used as drawn.
    Raw,
    /// Weights are rescaled to sum to `n`, so the loss carries the same total
    /// mass as the full-data fit on the shared grid.
    #[default]
    SumToN,
}

impl WeightNormalization {
    pub fn apply(&self, w: ArrayView1<f64>) -> Array1<f64> {
        match self {
            WeightNormalization::Raw => w.to_owned(),
            WeightNormalization::SumToN => {
                let scale = w.len() as f64 / w.sum();
                w.mapv(|v| v * scale)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightNormalization::Raw => "raw",
            WeightNormalization::SumToN => "sum-to-n",
        }
    }
}

impl std::str::FromStr for WeightNormalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(WeightNormalization::Raw),
            "sum-to-n" => Ok(WeightNormalization::SumToN),
            _ => Err(Error::Parse(format!("unknown weight normalization '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionRule {
    Min,
    OneSe,
}

impl SelectionRule {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionRule::Min => "min",
            SelectionRule::OneSe => "one_se",
        }
    }
}

impl std::str::FromStr for SelectionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(SelectionRule::Min),
            "one_se" | "one-se" | "1se" => Ok(SelectionRule::OneSe),
            _ => Err(Error::Parse(format!("unknown selection rule '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub k: usize,
    pub ratio: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { k: 100, ratio: 0.001 }
    }
}

impl GridSpec {
    pub fn build(&self, data: &Dataset, intercept: bool) -> Result<Vec<f64>> {
        compute_lambda_grid_with(data, self.k, self.ratio, intercept)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningConfig {
    pub scheme: WeightScheme,
    pub b: usize,
    pub grid: GridSpec,
    pub seed: u64,
    pub rules: Vec<SelectionRule>,
    pub solver: SolverOptions,
    pub normalization: WeightNormalization,
}

impl TuningConfig {
    pub fn new(scheme: WeightScheme, b: usize, seed: u64) -> Self {
        TuningConfig {
            scheme,
            b,
            grid: GridSpec::default(),
            seed,
            rules: vec![SelectionRule::Min, SelectionRule::OneSe],
            solver: SolverOptions::default(),
            normalization: WeightNormalization::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.b == 0 {
            return Err(Error::InvalidConfig("b must be positive".into()));
        }
        if self.b < 2 && self.rules.contains(&SelectionRule::OneSe) {
            return Err(Error::InvalidConfig(format!(
                "b = {} but the one-SE rule needs at least 2 replicates",
                self.b
            )));
        }
        if self.grid.k < 2 {
            return Err(Error::InvalidConfig(format!("grid size {} < 2", self.grid.k)));
        }
        self.scheme.validate(n)
    }
}

/// Prediction error per grid point, aggregated over replicates (or folds).
#[derive(Debug, Clone, PartialEq)]
pub struct MspeCurve {
    pub lambdas: Vec<f64>,
    /// Sum over replicates of `sum_i u_i (y_i - yhat_i)^2`.
    pub total_mspe: Array1<f64>,
    /// Per-replicate numerators, `b x K`.
    pub per_replicate_sse: Array2<f64>,
    /// Per-replicate `sum_i u_i`.
    pub test_mass: Array1<f64>,
    /// `per_replicate_sse / test_mass`, `b x K`.
    pub per_replicate_mspe: Array2<f64>,
    pub mean_mspe: Array1<f64>,
    pub se: Array1<f64>,
}

impl MspeCurve {
    /// Builds the curve from per-replicate numerators and test masses.
    pub fn from_replicates(lambdas: Vec<f64>, sse: Array2<f64>, mass: Array1<f64>) -> Self {
        let (b, k) = sse.dim();
        let mut total = Array1::zeros(k);
        for row in sse.axis_iter(Axis(0)) {
            total += &row;
        }
        let mut per = sse.clone();
        for (mut row, m) in per.axis_iter_mut(Axis(0)).zip(mass.iter()) {
            row /= *m;
        }
        let mean = per.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(k));
        let se = if b >= 2 {
            per.std_axis(Axis(0), 1.0) / (b as f64).sqrt()
        } else {
            Array1::zeros(k)
        };
        MspeCurve {
            lambdas,
            total_mspe: total,
            per_replicate_sse: sse,
            test_mass: mass,
            per_replicate_mspe: per,
            mean_mspe: mean,
            se,
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn replicates(&self) -> usize {
        self.per_replicate_sse.nrows()
    }
}

/// Index of the minimizing grid point of `values`; ties within relative
/// tolerance `1e-12` go to the largest penalty (smallest index).
pub fn argmin_largest_lambda(values: ArrayView1<f64>) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * min.abs();
    values.iter().position(|v| *v <= min + tol).unwrap_or(0)
}

/// Grid index minimizing the total prediction error.
pub fn select_lambda_min(curve: &MspeCurve) -> usize {
    argmin_largest_lambda(curve.total_mspe.view())
}

/// Largest penalty whose mean per-replicate error lies within one standard
/// error of the mean error at the minimizing penalty.
pub fn select_lambda_one_se(curve: &MspeCurve) -> usize {
    let imin = select_lambda_min(curve);
    let threshold = curve.mean_mspe[imin] + curve.se[imin];
    curve
        .mean_mspe
        .iter()
        .position(|m| *m <= threshold)
        .unwrap_or(imin)
        .min(imin)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub rule: SelectionRule,
    pub index: usize,
    pub lambda: f64,
    /// Read from the full-data, unit-weight path.
    pub active_set: ActiveSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub scheme: String,
    pub lambda_min: f64,
    pub lambda_one_se: Option<f64>,
    pub min: Selection,
    pub one_se: Option<Selection>,
    /// Mean training weight over the replicates actually used.
    pub rho: f64,
    pub discarded_replicates: usize,
    /// Degenerate draws that were replaced by a fresh draw.
    pub redrawn: usize,
    pub b_effective: usize,
    pub curve: MspeCurve,
    pub full_path: LassoPath,
    /// Per-repeat selections (exact cross-validation only).
    pub repeat_selections: Vec<(usize, Option<usize>)>,
}

impl TuningResult {
    pub fn selection(&self, rule: SelectionRule) -> Option<&Selection> {
        match rule {
            SelectionRule::Min => Some(&self.min),
            SelectionRule::OneSe => self.one_se.as_ref(),
        }
    }
}

fn make_selection(path: &LassoPath, rule: SelectionRule, index: usize) -> Selection {
    Selection {
        rule,
        index,
        lambda: path.lambdas[index],
        active_set: ActiveSet::from_coefficients(path.betas.row(index), index),
    }
}

/// Test-weighted squared errors of every path point, plus the test mass.
fn score_path(data: &Dataset, path: &LassoPath, u: ArrayView1<f64>) -> (Array1<f64>, f64) {
    let pred = path.predictions(data);
    let y = data.y();
    let mut sse = Array1::zeros(path.len());
    for (k, col) in pred.axis_iter(Axis(1)).enumerate() {
        let mut acc = 0.0;
        for i in 0..y.len() {
            if u[i] != 0.0 {
                let r = y[i] - col[i];
                acc += u[i] * r * r;
            }
        }
        sse[k] = acc;
    }
    (sse, u.sum())
}

enum ReplicateOutcome {
    Used {
        sse: Array1<f64>,
        mass: f64,
        w_sum: f64,
        redraws: usize,
    },
    Discarded,
}

fn run_replicate(data: &Dataset, grid: &[f64], config: &TuningConfig, replicate: usize) -> Result<ReplicateOutcome> {
    let n = data.n();
    let mut rng = replicate_rng(config.seed, replicate as u64);
    let mut redraws = 0;
    let draw: WeightDraw = loop {
        let d = config.scheme.draw(n, &mut rng, replicate)?;
        if !d.is_degenerate() {
            break d;
        }
        redraws += 1;
        if redraws > MAX_REDRAWS {
            return Ok(ReplicateOutcome::Discarded);
        }
    };
    let w = config.normalization.apply(draw.w.view());
    let path = fit_path(data, w.view(), grid, &config.solver).map_err(|e| Error::Replicate {
        replicate,
        source: Box::new(e),
    })?;
    let (sse, mass) = score_path(data, &path, draw.u.view());
    Ok(ReplicateOutcome::Used {
        sse,
        mass,
        w_sum: draw.w.sum(),
        redraws,
    })
}

/// Weighted-bootstrap penalty selection on a standardized dataset.
///
/// Replicates are evaluated on the current rayon pool; the reduction runs in
/// replicate order so the result does not depend on the number of workers.
pub fn run_weighted_bootstrap(data: &Dataset, config: &TuningConfig) -> Result<TuningResult> {
    if !data.is_standardized() {
        return Err(Error::NotStandardized);
    }
    config.validate(data.n())?;
    let grid = config.grid.build(data, config.solver.intercept)?;
    run_weighted_bootstrap_on_grid(data, config, &grid)
}

pub fn run_weighted_bootstrap_on_grid(data: &Dataset, config: &TuningConfig, grid: &[f64]) -> Result<TuningResult> {
    check_grid(grid)?;
    config.validate(data.n())?;
    let outcomes: Vec<ReplicateOutcome> = (0..config.b)
        .into_par_iter()
        .map(|r| run_replicate(data, grid, config, r))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut masses = Vec::new();
    let mut w_total = 0.0;
    let mut redrawn = 0;
    let mut discarded = 0;
    for outcome in outcomes {
        match outcome {
            ReplicateOutcome::Used {
                sse,
                mass,
                w_sum,
                redraws,
            } => {
                rows.push(sse);
                masses.push(mass);
                w_total += w_sum;
                redrawn += redraws;
            }
            ReplicateOutcome::Discarded => {
                discarded += 1;
                redrawn += MAX_REDRAWS;
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::AllReplicatesDegenerate);
    }
    let b_eff = rows.len();
    let mut sse = Array2::zeros((b_eff, grid.len()));
    for (mut dst, src) in sse.axis_iter_mut(Axis(0)).zip(rows.iter()) {
        dst.assign(src);
    }
    let curve = MspeCurve::from_replicates(grid.to_vec(), sse, Array1::from(masses));
    let rho = w_total / (b_eff * data.n()) as f64;
    finish(
        data,
        config.scheme.to_string(),
        &config.rules,
        &config.solver,
        curve,
        rho,
        discarded,
        redrawn,
        Vec::new(),
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    data: &Dataset,
    scheme: String,
    rules: &[SelectionRule],
    solver: &SolverOptions,
    curve: MspeCurve,
    rho: f64,
    discarded: usize,
    redrawn: usize,
    repeat_selections: Vec<(usize, Option<usize>)>,
) -> Result<TuningResult> {
    let full_path = fit_path(data, Array1::ones(data.n()).view(), &curve.lambdas, solver)?;
    let (imin, ise) = if repeat_selections.is_empty() {
        let imin = select_lambda_min(&curve);
        let ise =
            (rules.contains(&SelectionRule::OneSe) && curve.replicates() >= 2).then(|| select_lambda_one_se(&curve));
        (imin, ise)
    } else {
        let mins: Vec<usize> = repeat_selections.iter().map(|s| s.0).collect();
        let ses: Vec<usize> = repeat_selections.iter().filter_map(|s| s.1).collect();
        let ise = (rules.contains(&SelectionRule::OneSe) && !ses.is_empty()).then(|| median_index(&ses));
        (median_index(&mins), ise)
    };
    let min = make_selection(&full_path, SelectionRule::Min, imin);
    let one_se = ise.map(|i| make_selection(&full_path, SelectionRule::OneSe, i));
    Ok(TuningResult {
        scheme,
        lambda_min: min.lambda,
        lambda_one_se: one_se.as_ref().map(|s| s.lambda),
        min,
        one_se,
        rho,
        discarded_replicates: discarded,
        redrawn,
        b_effective: curve.replicates(),
        curve,
        full_path,
        repeat_selections,
    })
}

/// Median of grid indices; for an even count the larger index
/// (smaller penalty) of the middle pair.
pub fn median_index(indices: &[usize]) -> usize {
    let mut v = indices.to_vec();
    v.sort_unstable();
    v[v.len() / 2]
}

/// Median of values that lie on a common grid, using the same convention
/// as [`median_index`] (lower of the middle pair).
pub fn median_on_grid(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v[v.len() / 2]
}

/// Disjoint random partition of `0..n` into `k` folds whose sizes differ by at most one.
pub fn kfold_partition(n: usize, k: usize, rng: &mut impl rand::Rng) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for (f, fold) in folds.iter_mut().enumerate() {
        if fold.is_empty() {
            return Err(Error::FoldTooSmall { fold: f });
        }
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub rules: Vec<SelectionRule>,
    pub solver: SolverOptions,
    pub normalization: WeightNormalization,
}

impl CvConfig {
    pub fn new(k: usize, repeats: usize, seed: u64) -> Self {
        CvConfig {
            k,
            repeats,
            seed,
            grid: GridSpec::default(),
            rules: vec![SelectionRule::Min, SelectionRule::OneSe],
            solver: SolverOptions::default(),
            normalization: WeightNormalization::default(),
        }
    }
}

/// Exact k-fold cross-validation with disjoint folds, re-randomized per
/// repeat. Each repeat selects on its own curve; the reported penalties are
/// the median selections across repeats. `k = n` is leave-one-out, whose
/// partition is unique, so it is evaluated once and shared by all repeats.
pub fn run_exact_kfold_cv(data: &Dataset, config: &CvConfig) -> Result<TuningResult> {
    if !data.is_standardized() {
        return Err(Error::NotStandardized);
    }
    let grid = config.grid.build(data, config.solver.intercept)?;
    run_exact_kfold_cv_on_grid(data, config, &grid)
}

pub fn run_exact_kfold_cv_on_grid(data: &Dataset, config: &CvConfig, grid: &[f64]) -> Result<TuningResult> {
    check_grid(grid)?;
    let n = data.n();
    let k = config.k;
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, n });
    }
    if config.repeats == 0 {
        return Err(Error::InvalidConfig(
            "cross-validation needs at least one repeat".into(),
        ));
    }
    let distinct = if k == n { 1 } else { config.repeats };
    let cv_seed = derive_seed(config.seed, CV_SEED_TAG);
    let partitions: Vec<Vec<Vec<usize>>> = (0..distinct)
        .map(|r| kfold_partition(n, k, &mut replicate_rng(cv_seed, r as u64)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..distinct).flat_map(|r| (0..k).map(move |f| (r, f))).collect();

    let scored: Vec<(Array1<f64>, f64)> = jobs
        .par_iter()
        .map(|&(r, f)| {
            let fold = &partitions[r][f];
            let mut train = Array1::ones(n);
            let mut test = Array1::zeros(n);
            for &i in fold {
                train[i] = 0.0;
                test[i] = 1.0;
            }
            let w = config.normalization.apply(train.view());
            let path = fit_path(data, w.view(), grid, &config.solver).map_err(|e| Error::Replicate {
                replicate: r * k + f,
                source: Box::new(e),
            })?;
            Ok(score_path(data, &path, test.view()))
        })
        .collect::<Result<_>>()?;

    let mut repeat_selections = Vec::with_capacity(config.repeats);
    let mut sse = Array2::zeros((jobs.len(), grid.len()));
    let mut mass = Array1::zeros(jobs.len());
    for (row, (s, m)) in scored.into_iter().enumerate() {
        sse.row_mut(row).assign(&s);
        mass[row] = m;
    }
    let want_se = config.rules.contains(&SelectionRule::OneSe);
    for r in 0..distinct {
        let rows = r * k..(r + 1) * k;
        let curve = MspeCurve::from_replicates(
            grid.to_vec(),
            sse.slice(ndarray::s![rows.clone(), ..]).to_owned(),
            mass.slice(ndarray::s![rows]).to_owned(),
        );
        let imin = select_lambda_min(&curve);
        let ise = want_se.then(|| select_lambda_one_se(&curve));
        repeat_selections.push((imin, ise));
    }
    while repeat_selections.len() < config.repeats {
        repeat_selections.push(repeat_selections[0]);
    }
    let curve = MspeCurve::from_replicates(grid.to_vec(), sse, mass);
    let trained: usize = partitions.iter().flatten().map(|fold| n - fold.len()).sum();
    let rho = trained as f64 / (distinct * k * n) as f64;
    finish(
        data,
        format!("cv:{k}"),
        &config.rules,
        &config.solver,
        curve,
        rho,
        0,
        0,
        repeat_selections,
    )
}

/// Extended BIC along a unit-weight path:
/// `n log(RSS/n) + |A| log n + 2 gamma |A| log p`.
pub fn compute_ebic(data: &Dataset, path: &LassoPath, gamma: f64) -> Vec<f64> {
    let n = data.n() as f64;
    let log_p = (data.p() as f64).ln();
    let pred = path.predictions(data);
    pred.axis_iter(Axis(1))
        .zip(path.betas.axis_iter(Axis(0)))
        .map(|(fit, beta)| {
            let rss: f64 = data.y().iter().zip(fit.iter()).map(|(y, f)| (y - f).powi(2)).sum();
            let df = beta.iter().filter(|b| **b != 0.0).count() as f64;
            n * (rss / n).ln() + df * n.ln() + 2.0 * gamma * df * log_p
        })
        .collect()
}

/// Grid index minimizing EBIC (largest penalty on ties).
pub fn select_lambda_ebic(scores: &[f64]) -> usize {
    argmin_largest_lambda(ArrayView1::from(scores))
}
