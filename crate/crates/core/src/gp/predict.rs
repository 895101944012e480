use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DVector;

use super::linalg::{build_covariance, build_noisy_covariance, factorize, Factorization, JitterSchedule};
use super::types::{GpModel, PredictiveDistribution, TimeSeries};
use crate::{Error, Result};

static VARIANCE_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// Number of predictive variances clamped to zero in this process so far.
pub fn variance_clamp_count() -> u64 {
    VARIANCE_CLAMPS.load(Ordering::Relaxed)
}

fn clamp_variance(v: f64) -> f64 {
    if v < 0.0 {
        VARIANCE_CLAMPS.fetch_add(1, Ordering::Relaxed);
        0.0
    } else {
        v
    }
}

/// A GP conditioned on a set of training points, reusable for many test inputs.
#[derive(Debug, Clone)]
pub struct Posterior<'a> {
    model: GpModel,
    times: &'a [f64],
    state: Option<(Factorization, DVector<f64>)>,
}

impl<'a> Posterior<'a> {
    /// Condition `model` on `(times, values)`. Empty training data gives the prior.
    pub fn new(model: &GpModel, times: &'a [f64], values: &[f64], jitter: &JitterSchedule) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        let state = if times.is_empty() {
            None
        } else {
            let k = build_covariance(&model.kernel, times, times)?;
            let v = build_noisy_covariance(&k, model.noise_std)?;
            let fact = factorize(&v, jitter)?;
            let resid = DVector::from_iterator(values.len(), values.iter().map(|y| y - model.mean));
            let alpha = fact.solve(&resid);
            Some((fact, alpha))
        };
        Ok(Posterior {
            model: *model,
            times,
            state,
        })
    }

    /// Latent predictive distribution of `f(t_star)`.
    pub fn predict(&self, t_star: f64) -> PredictiveDistribution {
        let prior_var = self.model.kernel.variance();
        let Some((fact, alpha)) = &self.state else {
            return PredictiveDistribution {
                mean: self.model.mean,
                variance: prior_var,
            };
        };
        let k_star = DVector::from_iterator(
            self.times.len(),
            self.times.iter().map(|&t| self.model.kernel.eval(t_star, t)),
        );
        let mean = self.model.mean + k_star.dot(alpha);
        let v = fact.solve_lower(&k_star);
        PredictiveDistribution {
            mean,
            variance: clamp_variance(prior_var - v.dot(&v)),
        }
    }

    /// Predictive distribution of a noisy observation `y(t_star)`.
    pub fn predict_observation(&self, t_star: f64) -> PredictiveDistribution {
        let mut p = self.predict(t_star);
        p.variance += self.model.noise_std * self.model.noise_std;
        p
    }
}

/// Latent predictive mean and variance at `t_star` given `train`.
pub fn predict(model: &GpModel, train: &TimeSeries, t_star: f64) -> Result<PredictiveDistribution> {
    Ok(Posterior::new(model, train.timestamps(), train.values(), &JitterSchedule::default())?.predict(t_star))
}

/// Like [`predict`] but for the noisy observation, i.e. variance plus `noise_std^2`.
pub fn predict_observation(model: &GpModel, train: &TimeSeries, t_star: f64) -> Result<PredictiveDistribution> {
    Ok(
        Posterior::new(model, train.timestamps(), train.values(), &JitterSchedule::default())?
            .predict_observation(t_star),
    )
}

struct LikelihoodParts {
    value: f64,
    fact: Factorization,
    alpha: DVector<f64>,
}

fn likelihood_parts(model: &GpModel, data: &TimeSeries, jitter: &JitterSchedule) -> Result<LikelihoodParts> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let t = data.timestamps();
    let k = build_covariance(&model.kernel, t, t)?;
    let v = build_noisy_covariance(&k, model.noise_std)?;
    let fact = factorize(&v, jitter)?;
    let resid = DVector::from_iterator(data.len(), data.values().iter().map(|y| y - model.mean));
    let alpha = fact.solve(&resid);
    let n = data.len() as f64;
    let value = -0.5 * resid.dot(&alpha) - 0.5 * fact.log_det() - 0.5 * n * (2.0 * PI).ln();
    Ok(LikelihoodParts { value, fact, alpha })
}

/// `log p(y | t) = -1/2 (y-mu)^T V^-1 (y-mu) - 1/2 log|V| - n/2 log 2pi`.
pub fn log_marginal_likelihood(model: &GpModel, data: &TimeSeries) -> Result<f64> {
    log_marginal_likelihood_with(model, data, &JitterSchedule::default())
}

pub(crate) fn log_marginal_likelihood_with(model: &GpModel, data: &TimeSeries, jitter: &JitterSchedule) -> Result<f64> {
    Ok(likelihood_parts(model, data, jitter)?.value)
}

/// Log marginal likelihood and its gradient with respect to
/// `(ln output_scale, ln input_scale, ln noise_std)`.
pub fn log_marginal_likelihood_gradient(model: &GpModel, data: &TimeSeries) -> Result<(f64, [f64; 3])> {
    let parts = likelihood_parts(model, data, &JitterSchedule::default())?;
    let n = data.len();
    let t = data.timestamps();
    let v_inv = parts.fact.inverse();
    let a = &parts.alpha;
    let mut grad = [0.0; 3];
    let mut trace_w = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = a[i] * a[j] - v_inv[(i, j)];
            let dk = model.kernel.grad_log_params((t[i] - t[j]).abs());
            grad[0] += w * dk[0];
            grad[1] += w * dk[1];
        }
        trace_w += a[i] * a[i] - v_inv[(i, i)];
    }
    grad[0] *= 0.5;
    grad[1] *= 0.5;
    grad[2] = model.noise_std * model.noise_std * trace_w;
    Ok((parts.value, grad))
}
