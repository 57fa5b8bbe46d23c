//! Datasets, column standardization and CSV ingestion.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Design matrix and response, together with the centering and scaling
/// that was applied to them.
///
/// When `standardized` is set, every column of `x` has sample mean zero and
/// sample variance one (denominator `n - 1`) and `y` is centered. The stored
/// means and scales map coefficients back to the raw scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    column_means: Array1<f64>,
    column_scales: Array1<f64>,
    y_mean: f64,
    standardized: bool,
    names: Vec<String>,
}

impl Dataset {
    /// Wraps raw data without transforming it.
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        validate(&x, &y)?;
        let p = x.ncols();
        Ok(Dataset {
            x,
            y,
            column_means: Array1::zeros(p),
            column_scales: Array1::ones(p),
            y_mean: 0.0,
            standardized: false,
            names: default_names(p),
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::Dimension(format!(
                "{} names for {} columns",
                names.len(),
                self.p()
            )));
        }
        self.names = names;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn column_means(&self) -> &Array1<f64> {
        &self.column_means
    }

    pub fn column_scales(&self) -> &Array1<f64> {
        &self.column_scales
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Same covariates and transformation metadata with a new standardized
    /// response. The response is centered and its mean recorded.
    pub fn with_response(&self, raw_y: ArrayView1<f64>) -> Result<Self> {
        if raw_y.len() != self.n() {
            return Err(Error::Dimension(format!(
                "response has {} entries, expected {}",
                raw_y.len(),
                self.n()
            )));
        }
        if let Some(row) = raw_y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { row, col: self.p() });
        }
        let mut out = self.clone();
        if self.standardized {
            let y_mean = raw_y.sum() / raw_y.len() as f64;
            out.y = raw_y.mapv(|v| v - y_mean);
            out.y_mean = y_mean;
        } else {
            out.y = raw_y.to_owned();
        }
        Ok(out)
    }

    /// Keeps only the given rows, preserving transformation metadata.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            y: self.y.select(Axis(0), rows),
            column_means: self.column_means.clone(),
            column_scales: self.column_scales.clone(),
            y_mean: self.y_mean,
            standardized: self.standardized,
            names: self.names.clone(),
        }
    }

    /// Maps standardized-scale coefficients (and intercept) to the raw scale.
    pub fn coefficients_to_raw(&self, beta: ArrayView1<f64>, intercept: f64) -> (Array1<f64>, f64) {
        let raw = &beta / &self.column_scales;
        let shift = raw.dot(&self.column_means);
        (raw, self.y_mean + intercept - shift)
    }
}

fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

fn validate(x: &Array2<f64>, y: &Array1<f64>) -> Result<()> {
    let (n, p) = x.dim();
    if n < 2 || p < 1 {
        return Err(Error::Dimension(format!("need n >= 2 and p >= 1, got n={n}, p={p}")));
    }
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "response has {} entries, design has {n} rows",
            y.len()
        )));
    }
    for ((row, col), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteInput { row, col });
        }
    }
    if let Some(row) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { row, col: p });
    }
    Ok(())
}

/// Centers and scales every column of `raw_x` to sample mean zero and sample
/// variance one, and centers `raw_y`.
pub fn standardize(raw_x: &Array2<f64>, raw_y: &Array1<f64>) -> Result<Dataset> {
    validate(raw_x, raw_y)?;
    let (n, p) = raw_x.dim();
    let mut x = raw_x.clone();
    let mut means = Array1::zeros(p);
    let mut scales = Array1::zeros(p);
    for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n as f64;
        col.mapv_inplace(|v| v - mean);
        let var = col.dot(&col) / (n - 1) as f64;
        let sd = var.sqrt();
        // Relative test so that large-offset columns with rounding noise still count as constant.
        if sd.is_nan() || sd <= 1e-12 * mean.abs().max(1.0) {
            return Err(Error::ConstantColumn(j));
        }
        col.mapv_inplace(|v| v / sd);
        means[j] = mean;
        scales[j] = sd;
    }
    let y_mean = raw_y.sum() / n as f64;
    let y = raw_y.mapv(|v| v - y_mean);
    Ok(Dataset {
        x,
        y,
        column_means: means,
        column_scales: scales,
        y_mean,
        standardized: true,
        names: default_names(p),
    })
}

/// Raw columns read from a CSV file with a header row.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub covariate_names: Vec<String>,
    pub response_name: String,
}

impl RawTable {
    pub fn standardize(&self) -> Result<Dataset> {
        standardize(&self.x, &self.y)
            .map_err(|e| match e {
                Error::ConstantColumn(j) => Error::ConstantNamedColumn(self.covariate_names[j].clone()),
                other => other,
            })?
            .with_names(self.covariate_names.clone())
    }
}

/// Reads a numeric CSV with a header row. Every column other than `response`
/// becomes a covariate. Parse errors name the file line and column.
pub fn read_csv(path: &Path, response: &str) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv_from(file, response)
}

pub fn read_csv_from<R: std::io::Read>(reader: R, response: &str) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let resp_idx = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::Parse(format!("response column '{response}' not found in header")))?;

    let width = headers.len();
    let mut values: Vec<f64> = Vec::new();
    let mut y = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        if record.len() != width {
            return Err(Error::Parse(format!(
                "line {line}: expected {width} fields, found {}",
                record.len()
            )));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "line {line}, column '{}': cannot parse '{field}' as a number",
                    headers[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "line {line}, column '{}': non-finite value",
                    headers[j]
                )));
            }
            if j == resp_idx {
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = y.len();
    let p = width - 1;
    if p == 0 {
        return Err(Error::Parse("no covariate columns".into()));
    }
    let x = Array2::from_shape_vec((n, p), values).map_err(|e| Error::Dimension(e.to_string()))?;
    let covariate_names = headers
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != resp_idx)
        .map(|(_, h)| h.clone())
        .collect();
    Ok(RawTable {
        x,
        y: Array1::from(y),
        covariate_names,
        response_name: response.to_owned(),
    })
}

/// The diabetes quadratic-model design (442 observations, 64 covariates:
/// ten baseline variables, nine squares and 45 pairwise interactions),
/// bundled with the crate.
pub const DIABETES_CSV: &str = include_str!("../data/diabetes_quadratic.csv");

pub fn diabetes_raw() -> RawTable {
    read_csv_from(DIABETES_CSV.as_bytes(), "y").expect("bundled diabetes fixture parses")
}

pub fn diabetes() -> Dataset {
    diabetes_raw()
        .standardize()
        .expect("bundled diabetes fixture standardizes")
}
