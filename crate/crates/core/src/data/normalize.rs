use serde::{Deserialize, Serialize};

use crate::gp::TimeSeries;
use crate::{Error, Result};

/// Affine map to zero mean and unit sample standard deviation (n - 1 denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: f64,
    pub std: f64,
}

impl NormalizationStats {
    /// Sample mean and standard deviation of `values`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let std = (ss / (n - 1) as f64).sqrt();
        if std.is_nan() || std <= 0.0 || values.iter().all(|v| *v == values[0]) {
            return Err(Error::ZeroVariance);
        }
        Ok(NormalizationStats { mean, std })
    }

    pub fn apply(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }

    pub fn apply_series(&self, data: &TimeSeries) -> TimeSeries {
        data.with_values(data.values().iter().map(|y| self.apply(*y)).collect())
            .expect("affine map keeps values finite")
    }

    pub fn invert_series(&self, data: &TimeSeries) -> TimeSeries {
        data.with_values(data.values().iter().map(|z| self.invert(*z)).collect())
            .expect("affine map keeps values finite")
    }
}

/// Normalize a series with its own full-segment statistics.
pub fn normalize(data: &TimeSeries) -> Result<(TimeSeries, NormalizationStats)> {
    let stats = NormalizationStats::from_values(data.values())?;
    Ok((stats.apply_series(data), stats))
}

/// Where the target stream's normalization statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// Statistics of the whole archived segment.
    #[default]
    Offline,
    /// Running statistics of the observations seen so far.
    Online,
    /// Leave values untouched.
    None,
}

/// Causal running normalizer: each value is scaled with the statistics of
/// the values *before* it. Until two distinct values have been seen the
/// scale is 1 and the shift is the running mean (0 before any value).
#[derive(Debug, Clone, Default)]
pub struct StreamNormalizer {
    count: usize,
    mean: f64,
    m2: f64,
}

impl StreamNormalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current(&self) -> NormalizationStats {
        let std = if self.count >= 2 {
            (self.m2 / (self.count - 1) as f64).sqrt()
        } else {
            0.0
        };
        NormalizationStats {
            mean: self.mean,
            std: if std > 0.0 { std } else { 1.0 },
        }
    }

    /// Normalize `y` with the current statistics, then fold it in.
    pub fn push(&mut self, y: f64) -> f64 {
        let z = self.current().apply(y);
        self.count += 1;
        let delta = y - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (y - self.mean);
        z
    }

    pub fn normalize_series(data: &TimeSeries) -> TimeSeries {
        let mut norm = StreamNormalizer::new();
        data.with_values(data.values().iter().map(|y| norm.push(*y)).collect())
            .expect("affine map keeps values finite")
    }
}
