//! Weighted Lasso by coordinate descent.
//!
//! The objective is
//!
//! ```text
//! sum_i w_i (y_i - b0 - x_i . beta)^2 + lambda * sum_j |beta_j|
//! ```
//!
//! with no `1/n` or `1/sum(w)` factor; `b0` is only present when an
//! intercept is requested. Coordinate descent runs on the weighted Gram
//! matrix `X^T W X`, so each coordinate update costs `O(p)` regardless of `n`.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// `sign(z) * max(|z| - gamma, 0)`, returning an exact zero inside the threshold.
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Sweeps stop once the largest coordinate change falls below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Stationarity tolerance on `2 x_j^T W r` checked before returning.
    pub kkt_tol: f64,
    /// Fit an unpenalized intercept.
    pub intercept: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_sweeps: 10_000,
            kkt_tol: 1e-6,
            intercept: false,
        }
    }
}

/// Sufficient statistics of one weighted problem.
#[derive(Debug, Clone)]
pub struct WeightedGram {
    gram: Array2<f64>,
    xty: Array1<f64>,
    yty: f64,
    /// Weighted column means and response mean; zero without intercept.
    x_center: Array1<f64>,
    y_center: f64,
}

impl WeightedGram {
    pub fn new(data: &Dataset, w: ArrayView1<f64>, intercept: bool) -> Result<Self> {
        check_weights(w, data.n())?;
        let x = data.x();
        let y = data.y();
        let mut xw = x.to_owned();
        for (mut row, &wi) in xw.axis_iter_mut(Axis(0)).zip(w.iter()) {
            row *= wi;
        }
        let mut gram = xw.t().dot(x);
        let mut xty = xw.t().dot(y);
        let wy = &w * y;
        let mut yty = wy.dot(y);
        let mut x_center = Array1::zeros(data.p());
        let mut y_center = 0.0;
        if intercept {
            let sw = w.sum();
            x_center = xw.sum_axis(Axis(0)) / sw;
            y_center = wy.sum() / sw;
            for j in 0..data.p() {
                for k in 0..data.p() {
                    gram[[j, k]] -= sw * x_center[j] * x_center[k];
                }
                xty[j] -= sw * x_center[j] * y_center;
            }
            yty -= sw * y_center * y_center;
        }
        Ok(WeightedGram {
            gram,
            xty,
            yty,
            x_center,
            y_center,
        })
    }

    pub fn p(&self) -> usize {
        self.xty.len()
    }

    /// Smallest penalty at which the all-zero vector is optimal.
    pub fn lambda_max(&self) -> f64 {
        2.0 * self.xty.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Intercept implied by `beta` (zero when fit without intercept).
    pub fn intercept(&self, beta: ArrayView1<f64>) -> f64 {
        self.y_center - self.x_center.dot(&beta)
    }

    /// Objective value evaluated from the sufficient statistics.
    pub fn objective(&self, beta: ArrayView1<f64>, lambda: f64) -> f64 {
        let gb = self.gram.dot(&beta);
        let rss = self.yty - 2.0 * self.xty.dot(&beta) + beta.dot(&gb);
        rss.max(0.0) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }
}

fn check_weights(w: ArrayView1<f64>, n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::Dimension(format!("{} weights for {n} observations", w.len())));
    }
    if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidWeight(i));
    }
    if !w.iter().any(|v| *v > 0.0) {
        return Err(Error::NoPositiveWeight);
    }
    Ok(())
}

/// Coordinate-descent state over a [`WeightedGram`]: the current
/// coefficients and the half-gradient `c - G beta`.
#[derive(Debug, Clone)]
pub struct CoordinateDescent<'a> {
    system: &'a WeightedGram,
    beta: Array1<f64>,
    grad: Array1<f64>,
    sweeps: usize,
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(system: &'a WeightedGram, init: Option<ArrayView1<f64>>) -> Self {
        let beta = match init {
            Some(b) => b.to_owned(),
            None => Array1::zeros(system.p()),
        };
        let mut cd = CoordinateDescent {
            system,
            grad: Array1::zeros(system.p()),
            beta,
            sweeps: 0,
        };
        cd.refresh_gradient();
        cd
    }

    pub fn beta(&self) -> &Array1<f64> {
        &self.beta
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn objective(&self, lambda: f64) -> f64 {
        self.system.objective(self.beta.view(), lambda)
    }

    fn refresh_gradient(&mut self) {
        self.grad = &self.system.xty - &self.system.gram.dot(&self.beta);
    }

    #[inline]
    fn update(&mut self, j: usize, half_lambda: f64) -> f64 {
        let g = &self.system.gram;
        let gjj = g[[j, j]];
        let old = self.beta[j];
        let new = if gjj > 0.0 {
            soft_threshold(self.grad[j] + gjj * old, half_lambda) / gjj
        } else {
            0.0
        };
        let delta = new - old;
        if delta != 0.0 {
            self.beta[j] = new;
            let col = g.column(j);
            self.grad.scaled_add(-delta, &col);
        }
        delta.abs()
    }

    /// One cyclic pass over every coordinate; returns the largest change.
    pub fn sweep(&mut self, lambda: f64) -> f64 {
        self.sweeps += 1;
        let half = 0.5 * lambda;
        (0..self.beta.len()).fold(0.0_f64, |m, j| m.max(self.update(j, half)))
    }

    fn sweep_subset(&mut self, lambda: f64, idx: &[usize]) -> f64 {
        self.sweeps += 1;
        let half = 0.5 * lambda;
        idx.iter().fold(0.0_f64, |m, &j| m.max(self.update(j, half)))
    }

    /// Largest violation of the stationarity conditions, in units of the
    /// gradient `2 x_j^T W r`.
    pub fn kkt_violation(&self, lambda: f64) -> f64 {
        let mut worst = 0.0_f64;
        for (j, &b) in self.beta.iter().enumerate() {
            let g2 = 2.0 * self.grad[j];
            let v = if b != 0.0 {
                (g2 - lambda * b.signum()).abs()
            } else {
                (g2.abs() - lambda).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Solves the stationarity equations on the current support with the
    /// current signs and moves toward that point. Returns true when the
    /// result satisfies the optimality conditions to `kkt_tol`.
    fn polish(&mut self, lambda: f64, kkt_tol: f64) -> bool {
        let active: Vec<usize> = (0..self.beta.len()).filter(|&j| self.beta[j] != 0.0).collect();
        if active.is_empty() {
            return false;
        }
        let m = active.len();
        let g = &self.system.gram;
        let mut a = Array2::zeros((m, m));
        let mut rhs = Array1::zeros(m);
        for (r, &j) in active.iter().enumerate() {
            for (c, &k) in active.iter().enumerate() {
                a[[r, c]] = g[[j, k]];
            }
            rhs[r] = self.system.xty[j] - 0.5 * lambda * self.beta[j].signum();
        }
        let Some(sol) = cholesky_solve(a, rhs) else {
            return false;
        };
        // Walk toward the sign-constrained solution; if a coefficient would
        // cross zero, stop where the first one reaches it and drop it.
        let crossing = |b: f64, v: f64| v.signum() != b.signum() || v == 0.0;
        let step = active
            .iter()
            .zip(sol.iter())
            .filter(|(&j, v)| crossing(self.beta[j], **v))
            .map(|(&j, v)| self.beta[j] / (self.beta[j] - v))
            .fold(1.0_f64, f64::min);
        if step < 1.0 {
            for (&j, v) in active.iter().zip(sol.iter()) {
                let b = self.beta[j];
                self.beta[j] = if crossing(b, *v) && b / (b - v) <= step {
                    0.0
                } else {
                    b + step * (v - b)
                };
            }
            self.refresh_gradient();
            return false;
        }
        // The face minimizer never increases the objective, so it is kept
        // even when an inactive coordinate still has to enter.
        for (&j, v) in active.iter().zip(sol.iter()) {
            self.beta[j] = *v;
        }
        self.refresh_gradient();
        self.kkt_violation(lambda) <= kkt_tol
    }

    /// Runs full and active-set sweeps until convergence at `lambda`.
    ///
    /// Converged means a full sweep moved no coordinate by more than `tol`
    /// and the recomputed gradient meets the optimality conditions to
    /// `kkt_tol / 10`. Slow linear convergence on correlated designs is cut
    /// short by an exact solve on the active set once the support settles.
    pub fn solve(&mut self, lambda: f64, opts: &SolverOptions) -> Result<()> {
        const POLISH_EVERY: usize = 10;
        let target = 0.1 * opts.kkt_tol;
        let start = self.sweeps;
        let mut last_polish = start;
        let exhausted = |s: &Self| s.sweeps - start >= opts.max_sweeps;
        loop {
            let change = self.sweep(lambda);
            if change < opts.tol {
                self.refresh_gradient();
                if self.kkt_violation(lambda) <= target {
                    return Ok(());
                }
                // Nothing moves any more: further sweeps cannot reduce the violation.
                if change == 0.0 {
                    break;
                }
            }
            if self.sweeps - last_polish >= POLISH_EVERY {
                last_polish = self.sweeps;
                if self.polish(lambda, target) {
                    return Ok(());
                }
            }
            if exhausted(self) {
                break;
            }
            let active: Vec<usize> = (0..self.beta.len()).filter(|&j| self.beta[j] != 0.0).collect();
            if active.is_empty() {
                continue;
            }
            loop {
                let change = self.sweep_subset(lambda, &active);
                if change < opts.tol || exhausted(self) {
                    break;
                }
                if self.sweeps - last_polish >= POLISH_EVERY {
                    last_polish = self.sweeps;
                    if self.polish(lambda, target) {
                        return Ok(());
                    }
                }
            }
            if exhausted(self) {
                break;
            }
        }
        self.refresh_gradient();
        if self.kkt_violation(lambda) <= opts.kkt_tol || self.polish(lambda, opts.kkt_tol) {
            return Ok(());
        }
        Err(Error::DidNotConverge {
            max_sweeps: opts.max_sweeps,
        })
    }
}

/// Solves `a x = b` for symmetric positive definite `a`; `None` when the
/// factorization breaks down.
fn cholesky_solve(mut a: Array2<f64>, mut b: Array1<f64>) -> Option<Array1<f64>> {
    let m = b.len();
    let scale = (0..m).fold(0.0_f64, |s, i| s.max(a[[i, i]].abs()));
    for j in 0..m {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= a[[j, k]] * a[[j, k]];
        }
        if d.is_nan() || d <= 1e-12 * scale {
            return None;
        }
        let d = d.sqrt();
        a[[j, j]] = d;
        for i in j + 1..m {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = v / d;
        }
    }
    for i in 0..m {
        let mut v = b[i];
        for k in 0..i {
            v -= a[[i, k]] * b[k];
        }
        b[i] = v / a[[i, i]];
    }
    for i in (0..m).rev() {
        let mut v = b[i];
        for k in i + 1..m {
            v -= a[[k, i]] * b[k];
        }
        b[i] = v / a[[i, i]];
    }
    Some(b)
}

/// Coefficients (and intercept) of one weighted Lasso fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: Array1<f64>,
    pub intercept: f64,
    pub sweeps: usize,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLambda(lambda))
    }
}

/// Minimizes the weighted Lasso objective at a single penalty.
pub fn weighted_lasso_fit(
    data: &Dataset,
    w: ArrayView1<f64>,
    lambda: f64,
    init: Option<ArrayView1<f64>>,
    opts: &SolverOptions,
) -> Result<LassoFit> {
    check_lambda(lambda)?;
    let system = WeightedGram::new(data, w, opts.intercept)?;
    if let Some(b) = init {
        if b.len() != data.p() {
            return Err(Error::Dimension(format!(
                "initial vector has {} entries, expected {}",
                b.len(),
                data.p()
            )));
        }
    }
    let mut cd = CoordinateDescent::new(&system, init);
    cd.solve(lambda, opts)?;
    let intercept = system.intercept(cd.beta().view());
    Ok(LassoFit {
        sweeps: cd.sweeps(),
        intercept,
        beta: cd.beta,
    })
}

/// `K` log-spaced penalties from `lambda_max` down to `ratio * lambda_max`.
pub fn log_grid(lambda_max: f64, k: usize, ratio: f64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {k}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidGrid(format!("ratio {ratio} outside (0, 1)")));
    }
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "lambda_max {lambda_max} must be positive; is the response constant?"
        )));
    }
    let last = (k - 1) as f64;
    Ok((0..k)
        .map(|i| {
            if i == 0 {
                lambda_max
            } else {
                lambda_max * ratio.powf(i as f64 / last)
            }
        })
        .collect())
}

/// Penalty grid from the full-data, unit-weight `lambda_max = 2 max_j |x_j^T y|`.
pub fn compute_lambda_grid(data: &Dataset, k: usize, ratio: f64) -> Result<Vec<f64>> {
    compute_lambda_grid_with(data, k, ratio, false)
}

pub fn compute_lambda_grid_with(data: &Dataset, k: usize, ratio: f64, intercept: bool) -> Result<Vec<f64>> {
    let ones = Array1::ones(data.n());
    let system = WeightedGram::new(data, ones.view(), intercept)?;
    log_grid(system.lambda_max(), k, ratio)
}

/// Coefficients along a descending penalty grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    pub lambdas: Vec<f64>,
    /// `K x p`, row `k` fit at `lambdas[k]`.
    pub betas: Array2<f64>,
    pub intercepts: Vec<f64>,
    pub weights_used: Array1<f64>,
}

impl LassoPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `n x K` fitted values `b0 + X beta` for every grid point.
    pub fn predictions(&self, data: &Dataset) -> Array2<f64> {
        let mut pred = data.x().dot(&self.betas.t());
        for (mut col, b0) in pred.axis_iter_mut(Axis(1)).zip(self.intercepts.iter()) {
            col += *b0;
        }
        pred
    }
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    for l in grid {
        check_lambda(*l)?;
    }
    if grid.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::InvalidGrid("grid must be strictly decreasing".into()));
    }
    Ok(())
}

/// Warm-started fits along `grid`.
pub fn fit_path(data: &Dataset, w: ArrayView1<f64>, grid: &[f64], opts: &SolverOptions) -> Result<LassoPath> {
    check_grid(grid)?;
    let system = WeightedGram::new(data, w, opts.intercept)?;
    fit_path_gram(&system, w, grid, opts)
}

/// As [`fit_path`], reusing precomputed sufficient statistics.
pub fn fit_path_gram(
    system: &WeightedGram,
    w: ArrayView1<f64>,
    grid: &[f64],
    opts: &SolverOptions,
) -> Result<LassoPath> {
    let p = system.p();
    let mut betas = Array2::zeros((grid.len(), p));
    let mut intercepts = Vec::with_capacity(grid.len());
    let mut cd = CoordinateDescent::new(system, None);
    for (k, &lambda) in grid.iter().enumerate() {
        cd.solve(lambda, opts).map_err(|e| Error::PathPoint {
            index: k,
            source: Box::new(e),
        })?;
        betas.row_mut(k).assign(cd.beta());
        intercepts.push(system.intercept(cd.beta().view()));
    }
    Ok(LassoPath {
        lambdas: grid.to_vec(),
        betas,
        intercepts,
        weights_used: w.to_owned(),
    })
}

/// Column indices (zero-based) with nonzero coefficients at one grid point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    pub indices: Vec<usize>,
    pub lambda_index: usize,
}

impl ActiveSet {
    pub fn from_coefficients(beta: ArrayView1<f64>, lambda_index: usize) -> Self {
        ActiveSet {
            indices: beta
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != 0.0)
                .map(|(j, _)| j)
                .collect(),
            lambda_index,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn active_set(path: &LassoPath, lambda_index: usize) -> Result<ActiveSet> {
    if lambda_index >= path.len() {
        return Err(Error::IndexOutOfRange {
            index: lambda_index,
            len: path.len(),
        });
    }
    Ok(ActiveSet::from_coefficients(path.betas.row(lambda_index), lambda_index))
}
