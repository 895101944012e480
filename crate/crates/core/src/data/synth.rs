use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gp::{sample_prior_with, TemporalFeature, TimeSeries};
use crate::{Error, Result};

/// Regularly sampled series `y(t) = f(t) + eta` with `f` drawn from the
/// zero-mean Matern 5/2 GP of `feature` and `eta ~ N(0, sigma_n^2)`.
///
/// The latent draw consumes the seeded stream first, so with `sigma_n = 0`
/// the output equals [`crate::gp::sample_prior`] of the noise-free model.
pub fn generate_synthetic(feature: &TemporalFeature, n: usize, seed: u64) -> Result<TimeSeries> {
    feature.validate()?;
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let ts: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latent = feature.to_model().with_noise(0.0);
    let mut values = sample_prior_with(&latent, &ts, &mut rng)?;
    for v in values.iter_mut() {
        *v += feature.sigma_n * rng.sample::<f64, _>(StandardNormal);
    }
    TimeSeries::new(ts, values)
}
