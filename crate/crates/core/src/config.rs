//! Key-value configuration files for simulation studies.
//!
//! One `key = value` pair per line; `#` starts a comment. Lists are comma
//! separated, except `schemes`, which is separated by `;` because Beta
//! schemes contain a comma.
//!
//! ```text
//! seed = 7
//! dataset = diabetes        # or a CSV path, relative to this file
//! response = y              # response column when dataset is a CSV
//! n_replications = 5
//! b = 200
//! schemes = beta:0.4,3.6; beta:2,2
//! kfold = 3, 5, 10, n
//! mofn = 0.25, 0.5, 0.75, 1
//! cv_repeats = 1
//! truth = cv:10x10
//! ebic_gamma = 1            # or none
//! grid_size = 100
//! grid_ratio = 0.001
//! weight_normalization = sum-to-n
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::data::{diabetes, read_csv};
use crate::error::{Error, Result};
use crate::sim::{FoldCount, SimulationConfig};

const KEYS: &[&str] = &[
    "seed",
    "dataset",
    "response",
    "n_replications",
    "b",
    "schemes",
    "kfold",
    "mofn",
    "cv_repeats",
    "truth",
    "ebic_gamma",
    "grid_size",
    "grid_ratio",
    "weight_normalization",
];

/// Parsed `key = value` pairs with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {line_no}: expected 'key = value'")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Parse(format!("line {line_no}: unknown key '{key}'")));
            }
            if entries
                .insert(key.to_owned(), (value.trim().to_owned(), line_no))
                .is_some()
            {
                return Err(Error::Parse(format!("line {line_no}: duplicate key '{key}'")));
            }
        }
        Ok(KeyValues { entries })
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("line {line}: invalid value '{v}' for '{key}'"))),
        }
    }

    fn with_line<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match self.get(key) {
            Some((_, line)) => Error::Parse(format!("line {line}: '{key}': {e}")),
            None => e,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, (v, _))| (k.as_str(), v.as_str()))
    }
}

/// Reads a simulation config; relative dataset paths resolve against the
/// directory holding the config file.
pub fn load_simulation_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_simulation_config(&text, &base)
}

pub fn parse_simulation_config(text: &str, base_dir: &Path) -> Result<SimulationConfig> {
    let kv = KeyValues::parse(text)?;
    let seed: u64 = kv
        .parsed("seed")?
        .ok_or_else(|| Error::Parse("missing required key 'seed'".into()))?;

    let data = match kv.get("dataset") {
        None | Some(("diabetes", _)) => diabetes(),
        Some((file, line)) => {
            let response = kv.get("response").map(|(v, _)| v).unwrap_or("y");
            let mut p = PathBuf::from(file);
            if p.is_relative() {
                p = base_dir.join(p);
            }
            let table = read_csv(&p, response).map_err(|e| Error::Parse(format!("line {line}: dataset: {e}")))?;
            kv.with_line("dataset", table.standardize())?
        }
    };
    let n = data.n();
    let mut cfg = SimulationConfig::new(data, seed);

    if let Some(v) = kv.parsed("n_replications")? {
        cfg.n_replications = v;
    }
    if let Some(v) = kv.parsed("b")? {
        cfg.b = v;
    }
    if let Some(v) = kv.parsed("cv_repeats")? {
        cfg.cv_repeats = v;
    }
    if let Some(v) = kv.parsed("grid_size")? {
        cfg.grid.k = v;
    }
    if let Some(v) = kv.parsed("grid_ratio")? {
        cfg.grid.ratio = v;
    }
    if let Some(v) = kv.parsed("weight_normalization")? {
        cfg.normalization = v;
    }
    if let Some(v) = kv.parsed("truth")? {
        cfg.truth_rule = v;
    }
    if let Some((v, line)) = kv.get("ebic_gamma") {
        cfg.ebic_gamma = if v == "none" {
            None
        } else {
            let g: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("line {line}: invalid value '{v}' for 'ebic_gamma'")))?;
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Parse(format!("line {line}: ebic_gamma must lie in [0, 1]")));
            }
            Some(g)
        };
    }
    if let Some((v, _)) = kv.get("schemes") {
        let schemes = v
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .and_then(|f: crate::weights::SchemeFlag| f.resolve(n).map(|_| f))
            })
            .collect::<Result<Vec<_>>>();
        cfg.schemes = kv.with_line("schemes", schemes)?;
    }
    if let Some((v, line)) = kv.get("kfold") {
        cfg.kfold_baselines = list(v)
            .map(|t| match t {
                "n" | "loo" => Ok(FoldCount::Loo),
                _ => match t.parse::<usize>() {
                    Ok(k) if (2..=n).contains(&k) => Ok(FoldCount::K(k)),
                    _ => Err(Error::Parse(format!("line {line}: invalid fold count '{t}'"))),
                },
            })
            .collect::<Result<_>>()?;
    }
    if let Some((v, line)) = kv.get("mofn") {
        cfg.mofn_baselines = list(v)
            .map(|t| match t.parse::<f64>() {
                Ok(f) if f > 0.0 && f <= 1.0 => Ok(f),
                _ => Err(Error::Parse(format!("line {line}: invalid m/n fraction '{t}'"))),
            })
            .collect::<Result<_>>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}
