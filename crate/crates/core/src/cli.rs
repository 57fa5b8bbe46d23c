//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 malformed input,
//! 3 degenerate data.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::load_simulation_config;
use crate::data::read_csv;
use crate::error::{Error, Result};
use crate::evaluation::mcc_curve;
use crate::export;
use crate::lasso::fit_path;
use crate::manifest::{build_id, RunManifest, TOOL};
use crate::sim::{replication_dataset, run_simulation_study, summarize};
use crate::tuner::{
    run_exact_kfold_cv, run_weighted_bootstrap, CvConfig, GridSpec, SelectionRule, TuningConfig, WeightNormalization,
};
use crate::weights::{sorted_weight_profile, SchemeFlag, WeightScheme, WeightSchemeSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bootlasso", version = env!("CARGO_PKG_VERSION"), long_version = long_version())]
#[command(about = "Tune the Lasso penalty with the flexible-weighted bootstrap")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "BOOTLASSO_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

fn long_version() -> &'static str {
    let id = build_id();
    Box::leak(id.trim_start_matches(TOOL).trim_start().to_owned().into_boxed_str())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select the penalty for a CSV dataset.
    Tune(TuneArgs),
    /// Run a simulation study described by a config file.
    Simulate(SimulateArgs),
    /// Export the mean sorted training and test weights of a scheme.
    WeightsPreview(PreviewArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Clone)]
pub struct TuneArgs {
    /// CSV file with a header row.
    pub csv: PathBuf,
    #[arg(long)]
    pub response: String,
    /// beta:a,b | kfold:k | paired | mofn:f
    #[arg(long, default_value = "beta:1,3")]
    pub scheme: String,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 200)]
    pub b: usize,
    /// Comma-separated subset of min,one_se.
    #[arg(long, default_value = "min,one_se", value_delimiter = ',')]
    pub rules: Vec<SelectionRule>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 0.001)]
    pub grid_ratio: f64,
    /// sum-to-n or raw.
    #[arg(long, default_value = "sum-to-n")]
    pub weight_normalization: WeightNormalization,
    /// With a kfold scheme, run exact disjoint-fold cross-validation with
    /// this many repeats instead of hypergeometric weights.
    #[arg(long)]
    pub exact_cv: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct SimulateArgs {
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct PreviewArgs {
    #[arg(long)]
    pub scheme: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Output directory; defaults to the one recorded in the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_degenerate_data() {
        return EXIT_DEGENERATE;
    }
    match e {
        Error::Parse(_)
        | Error::InvalidScheme(_)
        | Error::InvalidShape { .. }
        | Error::InvalidFoldCount { .. }
        | Error::InvalidM { .. }
        | Error::InvalidConfig(_)
        | Error::NonFiniteInput { .. }
        | Error::Dimension(_)
        | Error::InvalidGrid(_)
        | Error::InvalidLambda(_)
        | Error::EmptyInput => EXIT_INPUT,
        _ => EXIT_FAILURE,
    }
}

/// Parses `argv` (including the program name) and runs it.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> i32 {
    match command {
        Command::Tune(a) => {
            let args = tune_argv(&a);
            with_manifest("tune", &a.out.clone(), a.seed, args, |m| cmd_tune(&a, m))
        }
        Command::Simulate(a) => {
            let args = vec![
                "simulate".into(),
                a.config.display().to_string(),
                "--out".into(),
                a.out.display().to_string(),
            ];
            with_manifest("simulate", &a.out.clone(), 0, args, |m| cmd_simulate(&a, m))
        }
        Command::WeightsPreview(a) => {
            let args = vec![
                "weights-preview".into(),
                "--scheme".into(),
                a.scheme.clone(),
                "--n".into(),
                a.n.to_string(),
                "--replicates".into(),
                a.replicates.to_string(),
                "--seed".into(),
                a.seed.to_string(),
                "--out".into(),
                a.out.display().to_string(),
            ];
            with_manifest("weights-preview", &a.out.clone(), a.seed, args, |m| {
                cmd_weights_preview(&a, m)
            })
        }
        Command::Replay(a) => cmd_replay(&a),
    }
}

fn tune_argv(a: &TuneArgs) -> Vec<String> {
    let mut v = vec![
        "tune".to_owned(),
        a.csv.display().to_string(),
        "--response".into(),
        a.response.clone(),
        "--scheme".into(),
        a.scheme.clone(),
        "--b".into(),
        a.b.to_string(),
        "--rules".into(),
        a.rules.iter().map(|r| r.name()).collect::<Vec<_>>().join(","),
        "--seed".into(),
        a.seed.to_string(),
        "--out".into(),
        a.out.display().to_string(),
        "--grid-size".into(),
        a.grid_size.to_string(),
        "--grid-ratio".into(),
        a.grid_ratio.to_string(),
        "--weight-normalization".into(),
        a.weight_normalization.name().into(),
    ];
    if let Some(r) = a.exact_cv {
        v.push("--exact-cv".into());
        v.push(r.to_string());
    }
    v
}

/// Filled in by a command as it runs.
#[derive(Debug, Default)]
pub struct ManifestFields {
    pub config: serde_json::Map<String, serde_json::Value>,
    pub artifacts: Vec<String>,
}

fn with_manifest<F>(command: &str, out: &Path, seed: u64, args: Vec<String>, body: F) -> i32
where
    F: FnOnce(&mut ManifestFields) -> Result<()>,
{
    let start = Instant::now();
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_FAILURE;
    }
    let mut fields = ManifestFields::default();
    let outcome = body(&mut fields);
    let (status, code, error) = match &outcome {
        Ok(()) => ("ok", EXIT_OK, None),
        Err(e) => {
            eprintln!("error: {e}");
            ("error", exit_code(e), Some(e.to_string()))
        }
    };
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: build_id(),
        command: command.into(),
        args,
        config: serde_json::Value::Object(fields.config),
        seed,
        artifacts: fields.artifacts,
        status: status.into(),
        exit_code: code,
        error,
        duration_secs: start.elapsed().as_secs_f64(),
    };
    if let Err(e) = manifest.write(&out.join("manifest.json")) {
        eprintln!("error: cannot write manifest: {e}");
        return if code == EXIT_OK { EXIT_FAILURE } else { code };
    }
    code
}

fn nominal_rho(scheme: &WeightScheme, flag: &SchemeFlag, n: usize) -> f64 {
    match flag {
        SchemeFlag::MOutOfN { fraction } => *fraction,
        SchemeFlag::KFold { k } => (*k as f64 - 1.0) / *k as f64,
        _ => scheme.expected_rho(n),
    }
}

pub fn cmd_tune(a: &TuneArgs, m: &mut ManifestFields) -> Result<()> {
    let table = read_csv(&a.csv, &a.response).map_err(|e| match e {
        Error::Io(msg) => Error::Parse(msg),
        other => other,
    })?;
    let flag: SchemeFlag = a.scheme.parse()?;
    let data = table.standardize()?;
    let n = data.n();
    let scheme = flag.resolve(n)?;
    let grid = GridSpec {
        k: a.grid_size,
        ratio: a.grid_ratio,
    };
    m.config.insert("csv".into(), json!(a.csv.display().to_string()));
    m.config.insert("response".into(), json!(a.response));
    m.config.insert("n".into(), json!(n));
    m.config.insert("p".into(), json!(data.p()));
    m.config.insert("scheme".into(), json!(flag.to_string()));
    m.config.insert("resolved_scheme".into(), json!(scheme.to_string()));
    m.config.insert("b".into(), json!(a.b));
    m.config.insert(
        "rules".into(),
        json!(a.rules.iter().map(|r| r.name()).collect::<Vec<_>>()),
    );
    m.config.insert("grid_size".into(), json!(a.grid_size));
    m.config.insert("grid_ratio".into(), json!(a.grid_ratio));
    m.config
        .insert("weight_normalization".into(), json!(a.weight_normalization.name()));
    m.config.insert("rho".into(), json!(nominal_rho(&scheme, &flag, n)));

    let result = match (a.exact_cv, scheme) {
        (Some(repeats), WeightScheme::KFold { k }) => {
            m.config.insert("exact_cv_repeats".into(), json!(repeats));
            let cfg = CvConfig {
                k,
                repeats,
                seed: a.seed,
                grid,
                rules: a.rules.clone(),
                solver: Default::default(),
                normalization: a.weight_normalization,
            };
            run_exact_kfold_cv(&data, &cfg)?
        }
        (Some(_), _) => {
            return Err(Error::InvalidConfig("--exact-cv requires a kfold scheme".into()));
        }
        (None, scheme) => {
            let cfg = TuningConfig {
                scheme,
                b: a.b,
                grid,
                seed: a.seed,
                rules: a.rules.clone(),
                solver: Default::default(),
                normalization: a.weight_normalization,
            };
            run_weighted_bootstrap(&data, &cfg)?
        }
    };
    m.config.insert("realized_rho".into(), json!(result.rho));
    m.config
        .insert("discarded_replicates".into(), json!(result.discarded_replicates));
    m.config.insert("redrawn_replicates".into(), json!(result.redrawn));
    m.config.insert(
        "one_se_note".into(),
        json!("bootstrap one-SE uses the across-replicate standard error of per-replicate test-weighted MSE"),
    );

    let curve_path = a.out.join("mspe_curve.csv");
    export::write_mspe_curve(std::fs::File::create(&curve_path)?, &result.curve)?;
    m.artifacts.push(curve_path.display().to_string());
    let result_path = a.out.join("tuning_result.csv");
    export::write_tuning_result(std::fs::File::create(&result_path)?, &result)?;
    m.artifacts.push(result_path.display().to_string());
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs, m: &mut ManifestFields) -> Result<()> {
    let cfg = load_simulation_config(&a.config)?;
    let text = std::fs::read_to_string(&a.config)?;
    let kv = crate::config::KeyValues::parse(&text)?;
    for (k, v) in kv.iter() {
        m.config.insert(k.into(), json!(v));
    }
    m.config
        .insert("config_path".into(), json!(a.config.display().to_string()));
    let result = run_simulation_study(&cfg)?;

    let results = a.out.join("simulation_results.csv");
    export::write_simulation_records(&results, &result)?;
    let summary = a.out.join("simulation_summary.csv");
    export::write_summary(std::fs::File::create(&summary)?, &summarize(&result))?;
    let truth = a.out.join("truth.csv");
    export::write_truth(&truth, &result.truth, &cfg.seed_dataset)?;
    m.artifacts
        .extend([results, summary, truth].iter().map(|p| p.display().to_string()));

    // MCC along the full path of the first replication.
    let data = replication_dataset(&cfg, &result.truth, 0)?;
    let grid = cfg.grid.build(&data, cfg.solver.intercept)?;
    let path = fit_path(&data, ndarray::Array1::ones(data.n()).view(), &grid, &cfg.solver)?;
    let mcc_path = a.out.join("mcc_curve.csv");
    export::write_mcc_curve(
        std::fs::File::create(&mcc_path)?,
        &mcc_curve(&path, &result.truth.support),
    )?;
    m.artifacts.push(mcc_path.display().to_string());

    if !result.errors.is_empty() {
        let errors = a.out.join("simulation_errors.csv");
        export::write_simulation_errors(&errors, &result)?;
        m.artifacts.push(errors.display().to_string());
    }
    m.config
        .insert("truth_support_size".into(), json!(result.truth.support.len()));
    m.config.insert("truth_lambda".into(), json!(result.truth.lambda));
    m.config.insert("truth_sigma".into(), json!(result.truth.sigma));
    m.config.insert("failed_cells".into(), json!(result.errors.len()));
    Ok(())
}

pub fn cmd_weights_preview(a: &PreviewArgs, m: &mut ManifestFields) -> Result<()> {
    let flag: SchemeFlag = a.scheme.parse()?;
    let scheme = flag.resolve(a.n)?;
    let spec = WeightSchemeSpec::new(scheme, a.seed);
    let profile = sorted_weight_profile(&spec, a.n, a.replicates)?;
    m.config.insert("scheme".into(), json!(flag.to_string()));
    m.config.insert("n".into(), json!(a.n));
    m.config.insert("replicates".into(), json!(a.replicates));
    m.config.insert("rho".into(), json!(profile.rho));
    m.artifacts = export::write_weight_profiles(&a.out, &profile, &flag.to_string())?;
    Ok(())
}

fn cmd_replay(a: &ReplayArgs) -> i32 {
    let manifest = match RunManifest::read(&a.manifest) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut args = manifest.args.clone();
    if let Some(out) = &a.out {
        match args.iter().position(|s| s == "--out") {
            Some(i) if i + 1 < args.len() => args[i + 1] = out.display().to_string(),
            _ => {
                args.push("--out".into());
                args.push(out.display().to_string());
            }
        }
    }
    let cli = match Cli::try_parse_from(std::iter::once(TOOL.to_owned()).chain(args)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: manifest arguments do not parse: {e}");
            return EXIT_INPUT;
        }
    };
    dispatch(cli.command)
}
