use std::f64::consts::PI;

use crate::gp::PredictiveDistribution;
use crate::{Error, Result};

/// Variances below this are raised to it before taking densities or precisions.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// `ln N(y; mean, variance)`.
pub fn gaussian_log_density(pred: &PredictiveDistribution, y: f64) -> f64 {
    let var = pred.variance.max(VARIANCE_FLOOR);
    let d = y - pred.mean;
    -0.5 * ((2.0 * PI * var).ln() + d * d / var)
}

/// `N(y; mean, variance)`.
pub fn gaussian_predictive_density(pred: &PredictiveDistribution, y: f64) -> f64 {
    gaussian_log_density(pred, y).exp()
}

/// Weighted product of Gaussian experts.
///
/// With precisions `P_j = 1 / var_j`, the fused distribution has
/// `var = 1 / sum(w_j P_j)` and `mean = var * sum(m_j w_j P_j)`. Sums run in
/// index order.
pub fn fuse(per_model: &[PredictiveDistribution], omega_hat: &[f64]) -> Result<PredictiveDistribution> {
    if per_model.is_empty() || per_model.len() != omega_hat.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions but {} weights",
            per_model.len(),
            omega_hat.len()
        )));
    }
    let mut precision = 0.0;
    let mut weighted_mean = 0.0;
    for (p, w) in per_model.iter().zip(omega_hat) {
        let wp = w / p.variance.max(VARIANCE_FLOOR);
        precision += wp;
        weighted_mean += p.mean * wp;
    }
    if !(precision > 0.0 && precision.is_finite()) {
        return Err(Error::DimensionMismatch(format!(
            "fused precision must be positive and finite, got {precision}"
        )));
    }
    Ok(PredictiveDistribution {
        mean: weighted_mean / precision,
        variance: 1.0 / precision,
    })
}

/// `(mean - k sigma, mean + k sigma)`.
pub fn confidence_interval(pred: &PredictiveDistribution, k: f64) -> (f64, f64) {
    let half = k * pred.std_dev();
    (pred.mean - half, pred.mean + half)
}
