use serde::{Deserialize, Serialize};

use crate::fusion::{gaussian_log_density, PredictionRecord};
use crate::gp::{PredictiveDistribution, TimeSeries};
use crate::{Error, Result};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{a} predictions but {b} truths")));
    }
    if a == 0 {
        return Err(Error::EmptySeries);
    }
    Ok(())
}

/// Mean negative log predictive density.
pub fn nll(predictions: &[PredictiveDistribution], truths: &[f64]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    let total: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, y)| -gaussian_log_density(p, *y))
        .sum();
    Ok(total / truths.len() as f64)
}

pub fn mae(means: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(means.len(), truths.len())?;
    Ok(means.iter().zip(truths).map(|(m, y)| (m - y).abs()).sum::<f64>() / truths.len() as f64)
}

pub fn mse(means: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(means.len(), truths.len())?;
    Ok(means.iter().zip(truths).map(|(m, y)| (m - y) * (m - y)).sum::<f64>() / truths.len() as f64)
}

/// Number of leading stream steps with no prediction.
pub fn delay(log: &[PredictionRecord], stream_len: usize) -> usize {
    log.iter().map(|r| r.step).min().unwrap_or(stream_len).min(stream_len)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub nll: f64,
    pub mae: f64,
    pub mse: f64,
    pub delay: usize,
    /// Number of predictions scored.
    pub steps: usize,
}

impl Metrics {
    /// Score every record of `log` against the stream value at its step.
    pub fn from_log(log: &[PredictionRecord], stream: &TimeSeries) -> Result<Metrics> {
        Metrics::from_log_since(log, stream, 0)
    }

    /// Like [`Metrics::from_log`] but only records with `step >= from_step`
    /// are scored. `delay` still refers to the whole log.
    pub fn from_log_since(log: &[PredictionRecord], stream: &TimeSeries, from_step: usize) -> Result<Metrics> {
        let scored: Vec<&PredictionRecord> = log.iter().filter(|r| r.step >= from_step).collect();
        let mut preds = Vec::with_capacity(scored.len());
        let mut truths = Vec::with_capacity(scored.len());
        for r in scored {
            let y = *stream.values().get(r.step).ok_or_else(|| {
                Error::DimensionMismatch(format!("log step {} beyond stream of {}", r.step, stream.len()))
            })?;
            preds.push(r.distribution());
            truths.push(y);
        }
        let means: Vec<f64> = preds.iter().map(|p| p.mean).collect();
        Ok(Metrics {
            nll: nll(&preds, &truths)?,
            mae: mae(&means, &truths)?,
            mse: mse(&means, &truths)?,
            delay: delay(log, stream.len()),
            steps: truths.len(),
        })
    }
}
