//! Gaussian-process regression over one-dimensional time inputs.

mod fit;
mod kernel;
mod linalg;
mod optimize;
mod predict;
mod sample;
mod types;

pub use fit::{fit_hyperparameters, Bounds, FitConfig, FitOutcome, FitWarning, RestartTrace, MIN_FIT_POINTS};
pub use kernel::KernelSpec;
pub use linalg::{build_covariance, build_noisy_covariance, factorize, Factorization, JitterSchedule};
pub use optimize::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use predict::{
    log_marginal_likelihood, log_marginal_likelihood_gradient, predict, predict_observation, variance_clamp_count,
    Posterior,
};
pub use sample::sample_prior;
pub(crate) use sample::sample_prior_with;
pub use types::{GpModel, PredictiveDistribution, TemporalFeature, TimeSeries};
