//! Dynamic model averaging over GP experts and weighted product-of-experts fusion.

mod ensemble;
mod poe;
mod weights;

pub use ensemble::{
    gptdf_step, run_stream, Diagnostics, EnsembleConfig, EnsembleState, FusedPrediction, PredictionRecord,
    PredictiveTarget,
};
pub use poe::{confidence_interval, fuse, gaussian_log_density, gaussian_predictive_density, VARIANCE_FLOOR};
pub use weights::{predictive_weights, update_weights, update_weights_log, WeightUpdate, WEIGHT_FLOOR};
