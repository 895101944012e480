use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{build_covariance, build_noisy_covariance, factorize, JitterSchedule};
use super::types::{check_increasing, GpModel};
use crate::{Error, Result};

/// One draw from `N(mu 1, K(ts, ts) + noise_std^2 I)`. Deterministic in `seed`.
pub fn sample_prior(model: &GpModel, ts: &[f64], seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_prior_with(model, ts, &mut rng)
}

pub(crate) fn sample_prior_with<R: Rng>(model: &GpModel, ts: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if ts.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_increasing(ts)?;
    model.validate()?;
    let k = build_covariance(&model.kernel, ts, ts)?;
    let v = build_noisy_covariance(&k, model.noise_std)?;
    let fact = factorize(&v, &JitterSchedule::default())?;
    let z = DVector::from_iterator(ts.len(), (0..ts.len()).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let draw = fact.mul_lower(&z);
    Ok(draw.iter().map(|x| x + model.mean).collect())
}
