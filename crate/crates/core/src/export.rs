//! Plot-ready CSV outputs.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! formatting, so every file re-parses to the exact in-memory values.

use std::io::Write;
use std::path::Path;

use crate::data::Dataset;
use crate::error::Result;
use crate::evaluation::MccCurve;
use crate::sim::{SimulationResult, SummaryRow, Truth};
use crate::tuner::{MspeCurve, TuningResult};
use crate::weights::WeightProfile;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_mspe_curve<W: Write>(out: W, curve: &MspeCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "total_mspe", "mean_mspe", "se"])?;
    for k in 0..curve.len() {
        w.write_record([
            num(curve.lambdas[k]),
            num(curve.total_mspe[k]),
            num(curve.mean_mspe[k]),
            num(curve.se[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tuning_result<W: Write>(out: W, result: &TuningResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rule", "lambda", "n_nonzero", "rho", "scheme"])?;
    for sel in [Some(&result.min), result.one_se.as_ref()].into_iter().flatten() {
        w.write_record([
            sel.rule.name().to_owned(),
            num(sel.lambda),
            sel.active_set.len().to_string(),
            num(result.rho),
            result.scheme.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mcc_curve<W: Write>(out: W, curve: &MccCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "mcc", "n_nonzero"])?;
    for k in 0..curve.lambdas.len() {
        w.write_record([
            num(curve.lambdas[k]),
            num(curve.mcc[k]),
            curve.model_size[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sorted-weight profile; the first line is a `# rho=` comment.
pub fn write_weight_profile<W: Write>(mut out: W, values: &[f64], scheme: &str, rho: f64) -> Result<()> {
    writeln!(out, "# rho={}", num(rho))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "mean_weight", "scheme", "rho"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([(i + 1).to_string(), num(*v), scheme.to_owned(), num(rho)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_weight_profiles(dir: &Path, profile: &WeightProfile, scheme: &str) -> Result<Vec<String>> {
    let train = dir.join("weights_train.csv");
    let test = dir.join("weights_test.csv");
    write_weight_profile(
        std::fs::File::create(&train)?,
        &profile.train.to_vec(),
        scheme,
        profile.rho,
    )?;
    write_weight_profile(
        std::fs::File::create(&test)?,
        &profile.test.to_vec(),
        scheme,
        profile.rho,
    )?;
    Ok(vec![train.display().to_string(), test.display().to_string()])
}

pub fn write_simulation_records(path: &Path, result: &SimulationResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "scheme",
        "family",
        "replication",
        "rule",
        "lambda",
        "lambda_index",
        "n_nonzero",
        "mcc",
        "rho",
    ])?;
    for r in &result.records {
        w.write_record([
            r.scheme.clone(),
            r.family.to_owned(),
            r.replication.to_string(),
            r.rule.to_owned(),
            num(r.lambda),
            r.lambda_index.to_string(),
            r.n_nonzero.to_string(),
            num(r.mcc),
            num(r.rho),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_simulation_errors(path: &Path, result: &SimulationResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scheme", "replication", "message"])?;
    for e in &result.errors {
        w.write_record([e.scheme.clone(), e.replication.to_string(), e.message.clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "family",
        "rule",
        "count",
        "median_lambda",
        "q1_lambda",
        "q3_lambda",
        "iqr_lambda",
        "median_n_nonzero",
        "median_mcc",
        "mean_rho",
    ])?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.family.to_owned(),
            r.rule.to_owned(),
            r.count.to_string(),
            num(r.median_lambda),
            num(r.q1_lambda),
            num(r.q3_lambda),
            num(r.q3_lambda - r.q1_lambda),
            num(r.median_n_nonzero),
            num(r.median_mcc),
            num(r.mean_rho),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_truth(path: &Path, truth: &Truth, data: &Dataset) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["index", "name", "beta"])?;
    for (j, b) in truth.beta.iter().enumerate() {
        w.write_record([j.to_string(), data.names()[j].clone(), num(*b)])?;
    }
    w.flush()?;
    Ok(())
}
