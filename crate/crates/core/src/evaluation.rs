//! Support-recovery scoring against a known truth.

use crate::lasso::{ActiveSet, LassoPath};

/// Confusion counts over the `p` coefficient positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectionConfusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl SelectionConfusion {
    /// Compares a selected index set with the true support; both are
    /// zero-based column indices below `p`.
    pub fn from_sets(selected: &[usize], truth: &[usize], p: usize) -> Self {
        let mut in_truth = vec![false; p];
        for &j in truth {
            in_truth[j] = true;
        }
        let mut in_sel = vec![false; p];
        for &j in selected {
            in_sel[j] = true;
        }
        let mut c = SelectionConfusion::default();
        for j in 0..p {
            match (in_sel[j], in_truth[j]) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Matthews correlation coefficient; 0 when any marginal count is zero.
pub fn mcc(c: &SelectionConfusion) -> f64 {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / denom.sqrt()
}

pub fn active_set_mcc(active: &ActiveSet, truth: &[usize], p: usize) -> f64 {
    mcc(&SelectionConfusion::from_sets(&active.indices, truth, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MccCurve {
    pub lambdas: Vec<f64>,
    pub mcc: Vec<f64>,
    pub model_size: Vec<usize>,
    pub max_mcc: f64,
    /// Grid indices attaining the maximum, ascending.
    pub argmax: Vec<usize>,
}

impl MccCurve {
    /// Whether the maximizing grid indices form one unbroken run.
    pub fn max_is_contiguous(&self) -> bool {
        self.argmax.windows(2).all(|w| w[1] == w[0] + 1)
    }

    /// `(largest, smallest)` penalty attaining the maximum.
    pub fn max_interval(&self) -> (f64, f64) {
        let first = *self.argmax.first().expect("curve is non-empty");
        let last = *self.argmax.last().expect("curve is non-empty");
        (self.lambdas[first], self.lambdas[last])
    }
}

pub fn mcc_curve(path: &LassoPath, true_support: &[usize]) -> MccCurve {
    let p = path.betas.ncols();
    let mut values = Vec::with_capacity(path.len());
    let mut sizes = Vec::with_capacity(path.len());
    for (k, row) in path.betas.outer_iter().enumerate() {
        let active = ActiveSet::from_coefficients(row, k);
        sizes.push(active.len());
        values.push(active_set_mcc(&active, true_support, p));
    }
    let max_mcc = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == max_mcc)
        .map(|(k, _)| k)
        .collect();
    MccCurve {
        lambdas: path.lambdas.clone(),
        mcc: values,
        model_size: sizes,
        max_mcc,
        argmax,
    }
}

pub fn model_size_curve(path: &LassoPath) -> Vec<usize> {
    path.betas
        .outer_iter()
        .map(|row| row.iter().filter(|b| **b != 0.0).count())
        .collect()
}
