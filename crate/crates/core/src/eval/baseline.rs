use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use crate::fusion::{EnsembleConfig, EnsembleState, PredictionRecord};
use crate::gp::{fit_hyperparameters, FitConfig, TemporalFeature, TimeSeries, MIN_FIT_POINTS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub feature: TemporalFeature,
    pub log: Vec<PredictionRecord>,
    pub metrics: Metrics,
}

/// Train on the first `n_train` points of the stream, then predict the rest
/// one step ahead with a sliding window of `ensemble.tau` observations.
pub fn run_baseline_gp(
    stream: &TimeSeries,
    n_train: usize,
    fit: &FitConfig,
    ensemble: &EnsembleConfig,
) -> Result<BaselineRun> {
    if n_train < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: n_train,
        });
    }
    if n_train >= stream.len() {
        return Err(Error::Config(format!(
            "training size {n_train} leaves nothing to predict in a stream of {}",
            stream.len()
        )));
    }
    let feature = fit_hyperparameters(&stream.slice(0, n_train), fit)?.feature;
    let mut state = EnsembleState::from_features(&[feature], ensemble.clone())?;
    let mut log = Vec::with_capacity(stream.len() - n_train);
    for (i, (t, y)) in stream.iter().enumerate() {
        if i >= n_train {
            let pred = state.predict_next(t)?;
            log.push(PredictionRecord {
                step: i,
                t,
                fused_mean: pred.distribution.mean,
                fused_variance: pred.distribution.variance,
                interval_low: pred.interval.0,
                interval_high: pred.interval.1,
                omega_hat: vec![1.0],
            });
        }
        state.observe(t, y)?;
    }
    let metrics = Metrics::from_log(&log, stream)?;
    Ok(BaselineRun { feature, log, metrics })
}
