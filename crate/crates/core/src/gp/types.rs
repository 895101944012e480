use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::{Error, Result};

/// Ordered `(timestamp, value)` pairs with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawSeries", into = "RawSeries")]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawSeries> for TimeSeries {
    type Error = Error;

    fn try_from(raw: RawSeries) -> Result<Self> {
        TimeSeries::new(raw.timestamps, raw.values)
    }
}

impl From<TimeSeries> for RawSeries {
    fn from(ts: TimeSeries) -> Self {
        RawSeries {
            timestamps: ts.timestamps,
            values: ts.values,
        }
    }
}

impl TimeSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        check_increasing(&timestamps)?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(TimeSeries { timestamps, values })
    }

    /// Regularly sampled series with timestamps `0, 1, ..., n-1`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let timestamps = (0..values.len()).map(|i| i as f64).collect();
        TimeSeries::new(timestamps, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.timestamps.iter().copied().zip(self.values.iter().copied())
    }

    /// The sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> TimeSeries {
        TimeSeries {
            timestamps: self.timestamps[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }

    /// Same timestamps, values replaced. Length must match.
    pub fn with_values(&self, values: Vec<f64>) -> Result<TimeSeries> {
        TimeSeries::new(self.timestamps.clone(), values)
    }
}

pub(crate) fn check_increasing(ts: &[f64]) -> Result<()> {
    if let Some(index) = ts.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    for (i, w) in ts.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::NonIncreasingTime {
                index: i + 1,
                previous: w[0],
                current: w[1],
            });
        }
    }
    Ok(())
}

/// The `{sigma_f, sigma_l, sigma_n}` triple that summarizes a series'
/// temporal structure under a Matern 5/2 GP. This is the only thing an edge
/// node ever shares about its data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalFeature {
    pub sigma_f: f64,
    pub sigma_l: f64,
    pub sigma_n: f64,
}

impl TemporalFeature {
    pub fn new(sigma_f: f64, sigma_l: f64, sigma_n: f64) -> Result<Self> {
        let feature = TemporalFeature {
            sigma_f,
            sigma_l,
            sigma_n,
        };
        feature.validate()?;
        Ok(feature)
    }

    pub fn validate(&self) -> Result<()> {
        positive("sigma_f", self.sigma_f)?;
        positive("sigma_l", self.sigma_l)?;
        non_negative("sigma_n", self.sigma_n)
    }

    pub fn to_model(&self) -> GpModel {
        GpModel {
            kernel: KernelSpec::Matern52 {
                sigma_f: self.sigma_f,
                sigma_l: self.sigma_l,
            },
            noise_std: self.sigma_n,
            mean: 0.0,
        }
    }

    pub(crate) fn to_log(self) -> [f64; 3] {
        [self.sigma_f.ln(), self.sigma_l.ln(), self.sigma_n.ln()]
    }

    pub(crate) fn from_log(x: &[f64]) -> Self {
        TemporalFeature {
            sigma_f: x[0].exp(),
            sigma_l: x[1].exp(),
            sigma_n: x[2].exp(),
        }
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

/// One candidate expert: kernel, observation noise and a constant mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub kernel: KernelSpec,
    pub noise_std: f64,
    #[serde(default)]
    pub mean: f64,
}

impl GpModel {
    pub fn new(kernel: KernelSpec, noise_std: f64, mean: f64) -> Result<Self> {
        let model = GpModel {
            kernel,
            noise_std,
            mean,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        non_negative("noise_std", self.noise_std)?;
        if !self.mean.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: self.mean,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    pub fn with_noise(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }
}

/// Gaussian predictive distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub mean: f64,
    pub variance: f64,
}

impl PredictiveDistribution {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: mean,
                reason: "must be finite",
            });
        }
        non_negative("variance", variance)?;
        Ok(PredictiveDistribution { mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}
