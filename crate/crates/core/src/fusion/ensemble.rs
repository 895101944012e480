//! The online fusion loop.
//!
//! Every step follows predict-then-update: the fused prediction for time `t`
//! is made from the current window and predictive weights before `y(t)` is
//! seen; once `y(t)` arrives each expert is scored by the density it assigned
//! to it, the posterior weights are updated, the forgetting step produces the
//! predictive weights for the next prediction, and the observation joins the
//! window. Because the first prediction needs no data, the loop has zero delay.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::poe::{confidence_interval, fuse, gaussian_log_density};
use super::weights::{predictive_weights, update_weights_log};
use crate::gp::{GpModel, JitterSchedule, Posterior, PredictiveDistribution, TemporalFeature, TimeSeries};
use crate::par::{map_slice, Execution};
use crate::{Error, Result};

/// Which quantity the experts predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictiveTarget {
    /// The noisy observation `y(t)`: latent variance plus `sigma_n^2`.
    #[default]
    Observation,
    /// The latent function value `f(t)`.
    Latent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    /// Sliding-window length.
    pub tau: usize,
    /// Forgetting parameter in (0, 1).
    pub alpha: f64,
    /// Half-width of the reported interval in standard deviations.
    pub interval_k: f64,
    pub target: PredictiveTarget,
    pub jitter: JitterSchedule,
    pub execution: Execution,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            tau: 50,
            alpha: 0.9,
            interval_k: 3.0,
            target: PredictiveTarget::Observation,
            jitter: JitterSchedule::default(),
            execution: Execution::default(),
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::Config("tau must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "forgetting parameter must lie in (0, 1)",
            });
        }
        if !(self.interval_k >= 0.0 && self.interval_k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "interval_k",
                value: self.interval_k,
                reason: "must be finite and >= 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedPrediction {
    pub t: f64,
    pub distribution: PredictiveDistribution,
    /// Each expert's prediction and the predictive weight it was fused with.
    pub per_model: Vec<(PredictiveDistribution, f64)>,
    pub interval: (f64, f64),
}

/// One line of the prediction log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub step: usize,
    pub t: f64,
    pub fused_mean: f64,
    pub fused_variance: f64,
    pub interval_low: f64,
    pub interval_high: f64,
    pub omega_hat: Vec<f64>,
}

impl PredictionRecord {
    pub fn distribution(&self) -> PredictiveDistribution {
        PredictiveDistribution {
            mean: self.fused_mean,
            variance: self.fused_variance,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Updates where every expert gave the observation zero density.
    pub degenerate_updates: usize,
    /// Updates skipped because no prediction had been made for the observation.
    pub unscored_observations: usize,
}

#[derive(Debug, Clone)]
struct Pending {
    t: f64,
    per_model: Vec<PredictiveDistribution>,
}

/// Mutable state of the fusion loop. Single writer.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    models: Vec<GpModel>,
    weights: Vec<f64>,
    omega_hat: Vec<f64>,
    window: VecDeque<(f64, f64)>,
    step: usize,
    pending: Option<Pending>,
    config: EnsembleConfig,
    diagnostics: Diagnostics,
}

impl EnsembleState {
    pub fn new(models: Vec<GpModel>, config: EnsembleConfig) -> Result<Self> {
        config.validate()?;
        if models.is_empty() {
            return Err(Error::Config("an ensemble needs at least one model".into()));
        }
        for m in &models {
            m.validate()?;
        }
        let m = models.len();
        let weights = vec![1.0 / m as f64; m];
        let omega_hat = predictive_weights(&weights, config.alpha)?;
        Ok(EnsembleState {
            models,
            weights,
            omega_hat,
            window: VecDeque::with_capacity(config.tau + 1),
            step: 0,
            pending: None,
            config,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn from_features(features: &[TemporalFeature], config: EnsembleConfig) -> Result<Self> {
        let models = features
            .iter()
            .map(|f| f.validate().map(|_| f.to_model()))
            .collect::<Result<Vec<_>>>()?;
        EnsembleState::new(models, config)
    }

    pub fn models(&self) -> &[GpModel] {
        &self.models
    }

    /// Posterior weights after the latest update.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Predictive weights used for the next prediction.
    pub fn omega_hat(&self) -> &[f64] {
        &self.omega_hat
    }

    /// Number of observations absorbed so far.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn window(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.window.iter().copied()
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    fn last_time(&self) -> Option<f64> {
        self.window.back().map(|(t, _)| *t)
    }

    fn check_after_window(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::NonFinite { index: self.step });
        }
        match self.last_time() {
            Some(last) if t <= last => Err(Error::NonIncreasingTime {
                index: self.step,
                previous: last,
                current: t,
            }),
            _ => Ok(()),
        }
    }

    /// Each expert's prediction at `t` from the current window.
    pub fn expert_predictions(&self, t: f64) -> Result<Vec<PredictiveDistribution>> {
        let (times, values): (Vec<f64>, Vec<f64>) = self.window.iter().copied().unzip();
        let target = self.config.target;
        let jitter = self.config.jitter;
        map_slice(self.config.execution, &self.models, |model| {
            let post = Posterior::new(model, &times, &values, &jitter)?;
            Ok(match target {
                PredictiveTarget::Observation => post.predict_observation(t),
                PredictiveTarget::Latent => post.predict(t),
            })
        })
        .into_iter()
        .collect()
    }

    /// Fused prediction for time `t`, made before `y(t)` is observed.
    pub fn predict_next(&mut self, t: f64) -> Result<FusedPrediction> {
        self.check_after_window(t)?;
        let per_model = self.expert_predictions(t)?;
        let distribution = fuse(&per_model, &self.omega_hat)?;
        let interval = confidence_interval(&distribution, self.config.interval_k);
        let fused = FusedPrediction {
            t,
            distribution,
            per_model: per_model.iter().copied().zip(self.omega_hat.iter().copied()).collect(),
            interval,
        };
        self.pending = Some(Pending { t, per_model });
        Ok(fused)
    }

    /// Absorb `y(t)`: score the pending prediction, update the weights, slide the window.
    pub fn observe(&mut self, t: f64, y: f64) -> Result<()> {
        self.check_after_window(t)?;
        if !y.is_finite() {
            return Err(Error::NonFinite { index: self.step });
        }
        match self.pending.take() {
            Some(p) if p.t == t => {
                let log_lik: Vec<f64> = p.per_model.iter().map(|d| gaussian_log_density(d, y)).collect();
                let update = update_weights_log(&self.omega_hat, &log_lik)?;
                if update.degenerate {
                    self.diagnostics.degenerate_updates += 1;
                }
                self.weights = update.weights;
                self.omega_hat = predictive_weights(&self.weights, self.config.alpha)?;
            }
            _ => self.diagnostics.unscored_observations += 1,
        }
        self.window.push_back((t, y));
        while self.window.len() > self.config.tau {
            self.window.pop_front();
        }
        self.step += 1;
        Ok(())
    }
}

/// Absorb `obs` and return the fused prediction for `t_next`.
pub fn gptdf_step(state: &mut EnsembleState, obs: (f64, f64), t_next: f64) -> Result<FusedPrediction> {
    state.observe(obs.0, obs.1)?;
    state.predict_next(t_next)
}

/// Run the loop over a whole stream: predict each point, then observe it.
/// Returns one record per stream point, starting at step 0.
pub fn run_stream(state: &mut EnsembleState, stream: &TimeSeries) -> Result<Vec<PredictionRecord>> {
    let mut log = Vec::with_capacity(stream.len());
    for (t, y) in stream.iter() {
        let step = state.step();
        let pred = state.predict_next(t)?;
        log.push(PredictionRecord {
            step,
            t,
            fused_mean: pred.distribution.mean,
            fused_variance: pred.distribution.variance,
            interval_low: pred.interval.0,
            interval_high: pred.interval.1,
            omega_hat: pred.per_model.iter().map(|(_, w)| *w).collect(),
        });
        state.observe(t, y)?;
    }
    Ok(log)
}
