//! Lasso penalty tuning with the flexible-weighted bootstrap.
//!
//! Training weights drawn from a Beta, hypergeometric or multinomial
//! distribution scale the Lasso loss; complementary test weights score
//! prediction error. The same procedure covers k-fold cross-validation, the
//! paired bootstrap and the m-out-of-n bootstrap.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod lasso;
pub mod manifest;
pub mod sim;
pub mod tuner;
pub mod weights;

pub use data::{standardize, Dataset};
pub use error::{Error, Result};
pub use lasso::{
    active_set, compute_lambda_grid, fit_path, soft_threshold, weighted_lasso_fit, ActiveSet, LassoFit, LassoPath,
    SolverOptions,
};
pub use tuner::{run_exact_kfold_cv, run_weighted_bootstrap, MspeCurve, TuningConfig, TuningResult};
pub use weights::{WeightDraw, WeightScheme, WeightSchemeSpec};
