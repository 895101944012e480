use serde::{Deserialize, Serialize};

use super::types::positive;
use crate::Result;

const SQRT5: f64 = 2.236_067_977_499_79;

/// Stationary covariance kernel over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `h^2 exp(-((t_i - t_j) / lambda)^2)`.
    SquaredExponential { h: f64, lambda: f64 },
    /// `sigma_f^2 (1 + sqrt(5) r / sigma_l + 5 r^2 / (3 sigma_l^2)) exp(-sqrt(5) r / sigma_l)`.
    Matern52 { sigma_f: f64, sigma_l: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::SquaredExponential { h, lambda } => {
                positive("h", h)?;
                positive("lambda", lambda)
            }
            KernelSpec::Matern52 { sigma_f, sigma_l } => {
                positive("sigma_f", sigma_f)?;
                positive("sigma_l", sigma_l)
            }
        }
    }

    /// `k(t_i, t_j)`.
    #[inline]
    pub fn eval(&self, t_i: f64, t_j: f64) -> f64 {
        self.eval_distance((t_i - t_j).abs())
    }

    /// Kernel value at distance `r = |t_i - t_j|`.
    #[inline]
    pub fn eval_distance(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::SquaredExponential { h, lambda } => {
                let u = r / lambda;
                h * h * (-u * u).exp()
            }
            KernelSpec::Matern52 { sigma_f, sigma_l } => {
                let u = r / sigma_l;
                sigma_f * sigma_f * (1.0 + SQRT5 * u + 5.0 / 3.0 * u * u) * (-SQRT5 * u).exp()
            }
        }
    }

    /// `k(t, t)`.
    pub fn variance(&self) -> f64 {
        self.eval_distance(0.0)
    }

    /// Partial derivatives of the kernel value at distance `r` with respect
    /// to the log of (output scale, input scale).
    pub fn grad_log_params(&self, r: f64) -> [f64; 2] {
        match *self {
            KernelSpec::SquaredExponential { h, lambda } => {
                let u = r / lambda;
                let k = h * h * (-u * u).exp();
                [2.0 * k, 2.0 * u * u * k]
            }
            KernelSpec::Matern52 { sigma_f, sigma_l } => {
                let u = r / sigma_l;
                let s2 = sigma_f * sigma_f;
                let e = (-SQRT5 * u).exp();
                let k = s2 * (1.0 + SQRT5 * u + 5.0 / 3.0 * u * u) * e;
                [2.0 * k, s2 * 5.0 / 3.0 * u * u * (1.0 + SQRT5 * u) * e]
            }
        }
    }

    /// (output scale, input scale) in the kernel's own parametrization.
    pub fn scales(&self) -> (f64, f64) {
        match *self {
            KernelSpec::SquaredExponential { h, lambda } => (h, lambda),
            KernelSpec::Matern52 { sigma_f, sigma_l } => (sigma_f, sigma_l),
        }
    }

    pub fn with_scales(&self, output: f64, input: f64) -> KernelSpec {
        match self {
            KernelSpec::SquaredExponential { .. } => KernelSpec::SquaredExponential {
                h: output,
                lambda: input,
            },
            KernelSpec::Matern52 { .. } => KernelSpec::Matern52 {
                sigma_f: output,
                sigma_l: input,
            },
        }
    }
}
