use crate::{Error, Result};

/// Posterior weights are floored at `WEIGHT_FLOOR / M` after each update so no
/// expert can die permanently.
pub const WEIGHT_FLOOR: f64 = 1e-8;

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::DimensionMismatch("at least one model is required".into()));
    }
    match weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        Some(index) => Err(Error::DegenerateWeight {
            index,
            value: weights[index],
        }),
        None => Ok(()),
    }
}

/// Normalize log-domain scores into a probability vector.
fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Predictive weights with forgetting: `w_j^alpha / sum_k w_k^alpha`.
pub fn predictive_weights(weights: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_weights(weights)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "forgetting parameter must lie in (0, 1)",
        });
    }
    let logits: Vec<f64> = weights.iter().map(|w| alpha * w.ln()).collect();
    Ok(softmax(&logits))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightUpdate {
    pub weights: Vec<f64>,
    /// Every likelihood was zero; the predictive weights were kept unchanged.
    pub degenerate: bool,
}

fn apply_floor(mut weights: Vec<f64>) -> Vec<f64> {
    let floor = WEIGHT_FLOOR / weights.len() as f64;
    let mut floored = false;
    for w in weights.iter_mut() {
        if *w < floor {
            *w = floor;
            floored = true;
        }
    }
    if floored {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    weights
}

/// Bayesian update `w_j ∝ w_hat_j p(y | M_j)`, followed by the weight floor.
pub fn update_weights(omega_hat: &[f64], likelihoods: &[f64]) -> Result<WeightUpdate> {
    if likelihoods.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::DimensionMismatch(
            "likelihoods must be finite and non-negative".into(),
        ));
    }
    let logs: Vec<f64> = likelihoods.iter().map(|p| p.ln()).collect();
    update_weights_log(omega_hat, &logs)
}

/// [`update_weights`] with log-likelihoods, which does not underflow when
/// every expert assigns tiny density to the observation.
pub fn update_weights_log(omega_hat: &[f64], log_likelihoods: &[f64]) -> Result<WeightUpdate> {
    check_weights(omega_hat)?;
    if omega_hat.len() != log_likelihoods.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights but {} likelihoods",
            omega_hat.len(),
            log_likelihoods.len()
        )));
    }
    if log_likelihoods.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
        return Err(Error::DimensionMismatch(
            "log-likelihoods must not be NaN or +inf".into(),
        ));
    }
    if log_likelihoods.iter().all(|l| *l == f64::NEG_INFINITY) {
        return Ok(WeightUpdate {
            weights: omega_hat.to_vec(),
            degenerate: true,
        });
    }
    let logits: Vec<f64> = omega_hat.iter().zip(log_likelihoods).map(|(w, l)| w.ln() + l).collect();
    Ok(WeightUpdate {
        weights: apply_floor(softmax(&logits)),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn predictive_weight_examples() {
        assert_eq!(predictive_weights(&[0.5, 0.5], 0.3).unwrap(), vec![0.5, 0.5]);
        assert_eq!(predictive_weights(&[1.0], 0.9).unwrap(), vec![1.0]);
        let w = predictive_weights(&[0.9, 0.1], 0.9).unwrap();
        let (a, b) = (0.9f64.powf(0.9), 0.1f64.powf(0.9));
        assert_abs_diff_eq!(w[0], a / (a + b), epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], b / (a + b), epsilon = 1e-15);
    }

    #[test]
    fn predictive_weight_errors() {
        assert!(matches!(
            predictive_weights(&[1.0, 0.0], 0.9),
            Err(Error::DegenerateWeight { index: 1, .. })
        ));
        assert!(predictive_weights(&[0.5, 0.5], 1.0).is_err());
        assert!(predictive_weights(&[0.5, 0.5], 0.0).is_err());
    }

    #[test]
    fn update_examples() {
        let same = update_weights(&[0.2, 0.3, 0.5], &[0.7, 0.7, 0.7]).unwrap();
        for (a, b) in same.weights.iter().zip([0.2, 0.3, 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let u = update_weights(&[0.5, 0.5], &[3.0, 1.0]).unwrap();
        assert_abs_diff_eq!(u.weights[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(u.weights[1], 0.25, epsilon = 1e-15);
        assert_eq!(update_weights(&[1.0], &[1e-30]).unwrap().weights, vec![1.0]);
    }

    #[test]
    fn all_zero_likelihoods_keep_prior() {
        let u = update_weights(&[0.4, 0.6], &[0.0, 0.0]).unwrap();
        assert!(u.degenerate);
        assert_eq!(u.weights, vec![0.4, 0.6]);
        assert!(update_weights(&[0.4, 0.6], &[-1.0, 0.0]).is_err());
    }

    #[test]
    fn floor_keeps_losers_alive() {
        let u = update_weights(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(u.weights[1] > 0.0);
        assert_abs_diff_eq!(u.weights[1], 0.5e-8 / (1.0 + 0.5e-8), epsilon = 1e-20);
    }

    #[test]
    fn log_update_survives_underflow() {
        let u = update_weights_log(&[0.5, 0.5], &[-2000.0, -2001.0]).unwrap();
        assert!(!u.degenerate);
        assert_abs_diff_eq!(u.weights[0], 1.0 / (1.0 + (-1.0f64).exp()), epsilon = 1e-15);
    }

    fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(1e-6f64..1.0, m).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn forgetting_contracts_toward_uniform(w in (2usize..8).prop_flat_map(simplex), alpha in 0.01f64..0.99) {
            let hat = predictive_weights(&w, alpha).unwrap();
            let max_w = w.iter().copied().fold(0.0, f64::max);
            let min_w = w.iter().copied().fold(1.0, f64::min);
            let max_h = hat.iter().copied().fold(0.0, f64::max);
            let min_h = hat.iter().copied().fold(1.0, f64::min);
            prop_assert!((hat.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            if max_w - min_w > 1e-9 {
                prop_assert!(max_h < max_w);
                prop_assert!(min_h > min_w);
            }
        }

        #[test]
        fn permutation_equivariance(w in (2usize..6).prop_flat_map(simplex), seed in 0u64..1000) {
            let m = w.len();
            let perm: Vec<usize> = (0..m).map(|i| (i + seed as usize) % m).collect();
            let lik: Vec<f64> = (0..m).map(|i| 0.1 + i as f64).collect();
            let hat = predictive_weights(&w, 0.9).unwrap();
            let up = update_weights(&hat, &lik).unwrap().weights;
            let wp: Vec<f64> = perm.iter().map(|&i| w[i]).collect();
            let lp: Vec<f64> = perm.iter().map(|&i| lik[i]).collect();
            let up_p = update_weights(&predictive_weights(&wp, 0.9).unwrap(), &lp).unwrap().weights;
            for (k, &i) in perm.iter().enumerate() {
                prop_assert!((up_p[k] - up[i]).abs() < 1e-14);
            }
        }
    }
}
