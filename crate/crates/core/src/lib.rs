//! Gaussian-process temporal data fusion.
//!
//! Edge nodes summarize their local time series as a three-number
//! [`TemporalFeature`] (output scale, length scale, noise level) fitted by
//! marginal-likelihood maximization. A cold-starting target node pulls those
//! features from a cloud registry, treats each one as a GP expert, and fuses
//! the experts' one-step-ahead predictions with dynamic model averaging and a
//! weighted product of experts. The target emits a prediction from its very
//! first step, without training on local data.
//!
//! Module map:
//!
//! * [`gp`]: kernels, covariance construction, prediction, likelihood, fitting, prior sampling.
//! * [`fusion`]: predictive weights with forgetting, Bayesian weight update, PoE fusion, the online loop.
//! * [`edge`]: feature messages, the cloud registry, edge-node roles and the simulation driver.
//! * [`data`]: CSV ingestion, normalization, synthetic series.
//! * [`eval`]: metrics, the train-then-predict baseline and the benchmark harness.

pub mod data;
pub mod edge;
mod error;
pub mod eval;
pub mod fusion;
pub mod gp;
pub mod par;

pub use error::{Error, ErrorCategory, Result};
pub use gp::{GpModel, KernelSpec, PredictiveDistribution, TemporalFeature, TimeSeries};
