//! Training and test weight generators for the resampling schemes.
//!
//! Every scheme is expressed as a pair of per-observation vectors: training
//! weights `w` that scale the fitting loss and test weights `u` that score
//! prediction error. Continuous (Beta) and 0/1 (k-fold emulation) schemes use
//! `u = 1 - w`; count-valued bootstrap schemes use the out-of-bag indicator
//! `u_i = 1 - 1(w_i > 0)`.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    Beta {
        a: f64,
        b: f64,
    },
    /// Hypergeometric 0/1 weights with `round(n (k-1) / k)` ones.
    KFold {
        k: usize,
    },
    /// Multinomial counts summing to `n`.
    Paired,
    /// Multinomial counts summing to `m`.
    MOutOfN {
        m: usize,
    },
}

impl WeightScheme {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            WeightScheme::Beta { a, b } => {
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidShape { a, b });
                }
            }
            WeightScheme::KFold { k } => {
                if k < 2 || k > n {
                    return Err(Error::InvalidFoldCount { k, n });
                }
            }
            WeightScheme::Paired => {
                if n == 0 {
                    return Err(Error::InvalidM { m: 0, n });
                }
            }
            WeightScheme::MOutOfN { m } => {
                if m < 1 || m > n {
                    return Err(Error::InvalidM { m, n });
                }
            }
        }
        Ok(())
    }

    /// Analytic mean training weight.
    pub fn expected_rho(&self, n: usize) -> f64 {
        match *self {
            WeightScheme::Beta { a, b } => a / (a + b),
            WeightScheme::KFold { k } => kfold_train_size(n, k) as f64 / n as f64,
            WeightScheme::Paired => 1.0,
            WeightScheme::MOutOfN { m } => m as f64 / n as f64,
        }
    }

    pub fn draw(&self, n: usize, rng: &mut impl Rng, replicate_id: usize) -> Result<WeightDraw> {
        match *self {
            WeightScheme::Beta { a, b } => draw_beta_weights(n, a, b, rng, replicate_id),
            WeightScheme::KFold { k } => draw_kfold_weights(n, k, rng, replicate_id),
            WeightScheme::Paired => draw_multinomial_weights(n, n, rng, replicate_id),
            WeightScheme::MOutOfN { m } => draw_multinomial_weights(n, m, rng, replicate_id),
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::Beta { a, b } => write!(f, "beta:{a},{b}"),
            WeightScheme::KFold { k } => write!(f, "kfold:{k}"),
            WeightScheme::Paired => write!(f, "paired"),
            WeightScheme::MOutOfN { m } => write!(f, "mofn:m={m}"),
        }
    }
}

/// A scheme as written on the command line: `beta:a,b`, `kfold:k`,
/// `paired` or `mofn:f` with `f` the fraction `m/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeFlag {
    Beta { a: f64, b: f64 },
    KFold { k: usize },
    Paired,
    MOutOfN { fraction: f64 },
}

impl SchemeFlag {
    /// Binds the flag to a sample size. `m = round(f n)`.
    pub fn resolve(&self, n: usize) -> Result<WeightScheme> {
        let scheme = match *self {
            SchemeFlag::Beta { a, b } => WeightScheme::Beta { a, b },
            SchemeFlag::KFold { k } => WeightScheme::KFold { k },
            SchemeFlag::Paired => WeightScheme::Paired,
            SchemeFlag::MOutOfN { fraction } => {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(Error::InvalidScheme(format!("mofn fraction {fraction} outside (0, 1]")));
                }
                WeightScheme::MOutOfN {
                    m: ((fraction * n as f64).round() as usize).max(1),
                }
            }
        };
        scheme.validate(n)?;
        Ok(scheme)
    }
}

impl fmt::Display for SchemeFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeFlag::Beta { a, b } => write!(f, "beta:{a},{b}"),
            SchemeFlag::KFold { k } => write!(f, "kfold:{k}"),
            SchemeFlag::Paired => write!(f, "paired"),
            SchemeFlag::MOutOfN { fraction } => write!(f, "mofn:{fraction}"),
        }
    }
}

impl FromStr for SchemeFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidScheme(s.to_owned());
        let s = s.trim();
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match (kind, args) {
            ("beta", Some(args)) => {
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                let (a, b) = (num(a)?, num(b)?);
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidShape { a, b });
                }
                Ok(SchemeFlag::Beta { a, b })
            }
            ("kfold", Some(k)) => {
                let k: usize = k.trim().parse().map_err(|_| bad())?;
                if k < 2 {
                    return Err(bad());
                }
                Ok(SchemeFlag::KFold { k })
            }
            ("paired", None) => Ok(SchemeFlag::Paired),
            ("mofn", Some(f)) => {
                let fraction = num(f)?;
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(bad());
                }
                Ok(SchemeFlag::MOutOfN { fraction })
            }
            _ => Err(bad()),
        }
    }
}

/// A scheme plus the seed that drives all of its replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSchemeSpec {
    pub kind: WeightScheme,
    pub seed: u64,
}

impl WeightSchemeSpec {
    pub fn new(kind: WeightScheme, seed: u64) -> Self {
        WeightSchemeSpec { kind, seed }
    }

    /// Draws replicate `replicate_id`. The result depends only on
    /// `(kind, seed, replicate_id)`, never on the order of calls.
    pub fn draw(&self, n: usize, replicate_id: usize) -> Result<WeightDraw> {
        let mut rng = replicate_rng(self.seed, replicate_id as u64);
        self.kind.draw(n, &mut rng, replicate_id)
    }
}

/// Independent stream per replicate.
pub fn replicate_rng(seed: u64, replicate_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate_id);
    rng
}

/// Derives a sub-seed for a named purpose (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightDraw {
    pub w: Array1<f64>,
    pub u: Array1<f64>,
    pub replicate_id: usize,
}

impl WeightDraw {
    pub fn positive_count(&self) -> usize {
        self.w.iter().filter(|v| **v > 0.0).count()
    }

    /// Fewer than two observations carry training weight, or nothing is left to test on.
    pub fn is_degenerate(&self) -> bool {
        let mass = self.u.sum();
        self.positive_count() < 2 || mass.is_nan() || mass <= 0.0
    }
}

pub fn draw_beta_weights(n: usize, a: f64, b: f64, rng: &mut impl Rng, replicate_id: usize) -> Result<WeightDraw> {
    let dist = Beta::new(a, b).map_err(|_| Error::InvalidShape { a, b })?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidShape { a, b });
    }
    let w: Array1<f64> = (0..n)
        .map(|_| loop {
            // Extreme shapes can round to the boundary; those draws are redone.
            let v: f64 = dist.sample(rng);
            if v > 0.0 && v < 1.0 {
                break v;
            }
        })
        .collect();
    let u = w.mapv(|v| 1.0 - v);
    Ok(WeightDraw { w, u, replicate_id })
}

/// Number of training observations for the k-fold emulation.
pub fn kfold_train_size(n: usize, k: usize) -> usize {
    (n as f64 * (k - 1) as f64 / k as f64).round() as usize
}

pub fn draw_kfold_weights(n: usize, k: usize, rng: &mut impl Rng, replicate_id: usize) -> Result<WeightDraw> {
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, n });
    }
    let h = kfold_train_size(n, k);
    let mut w = Array1::zeros(n);
    for i in sample(rng, n, h).iter() {
        w[i] = 1.0;
    }
    let u = w.mapv(|v| 1.0 - v);
    Ok(WeightDraw { w, u, replicate_id })
}

/// `w ~ Multinomial(m; 1/n, ..., 1/n)` with out-of-bag test indicators.
pub fn draw_multinomial_weights(n: usize, m: usize, rng: &mut impl Rng, replicate_id: usize) -> Result<WeightDraw> {
    if m < 1 || n == 0 {
        return Err(Error::InvalidM { m, n });
    }
    let mut w = Array1::<f64>::zeros(n);
    for _ in 0..m {
        w[rng.random_range(0..n)] += 1.0;
    }
    let u = w.mapv(|v| if v > 0.0 { 0.0 } else { 1.0 });
    Ok(WeightDraw { w, u, replicate_id })
}

/// Grand mean of every weight entry across the samples.
pub fn compute_rho<'a, I>(w_samples: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Array1<f64>>,
{
    let mut total = 0.0;
    let mut count = 0usize;
    for w in w_samples {
        total += w.sum();
        count += w.len();
    }
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(total / count as f64)
}

/// Mean order statistics of the training and test weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    /// Ascending.
    pub train: Array1<f64>,
    pub test: Array1<f64>,
    pub rho: f64,
}

pub fn sorted_weight_profile(spec: &WeightSchemeSpec, n: usize, replicates: usize) -> Result<WeightProfile> {
    if replicates == 0 {
        return Err(Error::EmptyInput);
    }
    spec.kind.validate(n)?;
    let mut train = Array1::<f64>::zeros(n);
    let mut test = Array1::<f64>::zeros(n);
    let mut total = 0.0;
    for r in 0..replicates {
        let draw = spec.draw(n, r)?;
        total += draw.w.sum();
        let mut w = draw.w.to_vec();
        let mut u = draw.u.to_vec();
        w.sort_by(f64::total_cmp);
        u.sort_by(f64::total_cmp);
        train += &Array1::from(w);
        test += &Array1::from(u);
    }
    let r = replicates as f64;
    Ok(WeightProfile {
        train: train / r,
        test: test / r,
        rho: total / (r * n as f64),
    })
}
