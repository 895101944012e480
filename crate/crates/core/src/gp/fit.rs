//! Temporal-feature extraction by maximizing the log marginal likelihood.
//!
//! Optimization runs in log-parameter space, so positivity holds by
//! construction. Each restart is an independent bounded Nelder–Mead run
//! followed by one re-started polish pass; restarts may run in parallel and the
//! winner is chosen deterministically (highest objective, lowest index on ties).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::JitterSchedule;
use super::optimize::{nelder_mead, NelderMeadOptions};
use super::predict::log_marginal_likelihood_with;
use super::types::{TemporalFeature, TimeSeries};
use crate::par::{map_indexed, Execution};
use crate::{Error, Result};

/// Fewer points than this make the three-parameter fit meaningless.
pub const MIN_FIT_POINTS: usize = 8;

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bounds {
    pub sigma_f: (f64, f64),
    pub sigma_l: (f64, f64),
    pub sigma_n: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            sigma_f: (1e-3, 1e3),
            sigma_l: (1e-3, 1e3),
            sigma_n: (0.1, 1e2),
        }
    }
}

impl Bounds {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("sigma_f", self.sigma_f),
            ("sigma_l", self.sigma_l),
            ("sigma_n", self.sigma_n),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::Config(format!(
                    "bounds for {name} must satisfy 0 < lower <= upper < inf, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    fn log_lower(&self) -> [f64; 3] {
        [self.sigma_f.0.ln(), self.sigma_l.0.ln(), self.sigma_n.0.ln()]
    }

    fn log_upper(&self) -> [f64; 3] {
        [self.sigma_f.1.ln(), self.sigma_l.1.ln(), self.sigma_n.1.ln()]
    }

    pub fn contains(&self, f: &TemporalFeature) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(f.sigma_f, self.sigma_f) && inside(f.sigma_l, self.sigma_l) && inside(f.sigma_n, self.sigma_n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub bounds: Bounds,
    /// Number of log-uniform random starting points.
    pub restarts: usize,
    pub jitter: JitterSchedule,
    pub seed: u64,
    /// Extra starting points tried before the random ones.
    pub initial: Vec<TemporalFeature>,
    pub max_evaluations: usize,
    pub execution: Execution,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            bounds: Bounds::default(),
            restarts: 8,
            jitter: JitterSchedule::default(),
            seed: 0,
            initial: Vec::new(),
            max_evaluations: 2000,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWarning {
    /// No restart improved on its starting point; the best start is returned.
    NoImprovement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub initial: TemporalFeature,
    pub initial_objective: f64,
    pub feature: TemporalFeature,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub feature: TemporalFeature,
    /// Log marginal likelihood at `feature`.
    pub log_likelihood: f64,
    pub restarts: Vec<RestartTrace>,
    pub warning: Option<FitWarning>,
}

fn starting_points(config: &FitConfig) -> Vec<[f64; 3]> {
    let lower = config.bounds.log_lower();
    let upper = config.bounds.log_upper();
    let mut points: Vec<[f64; 3]> = config
        .initial
        .iter()
        .map(|f| {
            let mut x = f.to_log();
            for k in 0..3 {
                x[k] = x[k].clamp(lower[k], upper[k]);
            }
            x
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.restarts {
        let mut x = [0.0; 3];
        for k in 0..3 {
            x[k] = if upper[k] > lower[k] {
                rng.random_range(lower[k]..upper[k])
            } else {
                lower[k]
            };
        }
        points.push(x);
    }
    points
}

/// Fit `{sigma_f, sigma_l, sigma_n}` of a zero-mean Matern 5/2 GP to `data`.
pub fn fit_hyperparameters(data: &TimeSeries, config: &FitConfig) -> Result<FitOutcome> {
    if data.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: data.len(),
        });
    }
    config.bounds.validate()?;
    let starts = starting_points(config);
    if starts.is_empty() {
        return Err(Error::Config("fit needs at least one starting point".into()));
    }

    let objective = |x: &[f64]| -> f64 {
        let model = TemporalFeature::from_log(x).to_model();
        match log_marginal_likelihood_with(&model, data, &config.jitter) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };
    let lower = config.bounds.log_lower();
    let upper = config.bounds.log_upper();
    let opts = NelderMeadOptions {
        max_evaluations: config.max_evaluations,
        ..Default::default()
    };

    let traces = map_indexed(config.execution, starts.len(), |i| {
        let x0 = starts[i];
        let f0 = objective(&x0);
        let first = nelder_mead(objective, &x0, &lower, &upper, &opts);
        // a fresh simplex at the optimum catches premature collapse
        let second = nelder_mead(objective, &first.x, &lower, &upper, &opts);
        let best = if second.value <= first.value { &second } else { &first };
        RestartTrace {
            initial: TemporalFeature::from_log(&x0),
            initial_objective: -f0,
            feature: TemporalFeature::from_log(&best.x),
            objective: -best.value,
            evaluations: first.evaluations + second.evaluations,
            converged: best.converged,
        }
    });

    let pick = |score: &dyn Fn(&RestartTrace) -> f64| -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, t) in traces.iter().enumerate() {
            let s = score(t);
            if !s.is_finite() {
                continue;
            }
            match best {
                Some(b) if s <= score(&traces[b]) + TIE_TOLERANCE => {}
                _ => best = Some(i),
            }
        }
        best
    };

    let improved = traces
        .iter()
        .any(|t| t.objective.is_finite() && (t.objective > t.initial_objective || t.initial_objective.is_nan()));
    if improved {
        let best = pick(&|t| t.objective).ok_or(Error::NotPositiveDefinite)?;
        Ok(FitOutcome {
            feature: traces[best].feature,
            log_likelihood: traces[best].objective,
            restarts: traces,
            warning: None,
        })
    } else {
        let best = pick(&|t| t.initial_objective).ok_or(Error::NotPositiveDefinite)?;
        log::warn!("no restart improved on its starting point; returning best initialization");
        Ok(FitOutcome {
            feature: traces[best].initial,
            log_likelihood: traces[best].initial_objective,
            restarts: traces,
            warning: Some(FitWarning::NoImprovement),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_points() {
        let data = TimeSeries::from_values(vec![0.1; 7]).unwrap();
        assert!(matches!(
            fit_hyperparameters(&data, &FitConfig::default()),
            Err(Error::InsufficientData { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn starting_points_are_seeded_and_in_bounds() {
        let config = FitConfig {
            seed: 5,
            ..Default::default()
        };
        let a = starting_points(&config);
        assert_eq!(a, starting_points(&config));
        assert_eq!(a.len(), 8);
        for x in &a {
            assert!(config.bounds.contains(&TemporalFeature::from_log(x)));
        }
    }

    #[test]
    fn bad_bounds_rejected() {
        let data = TimeSeries::from_values((0..10).map(|i| (i as f64).sin()).collect()).unwrap();
        let config = FitConfig {
            bounds: Bounds {
                sigma_n: (0.0, 1.0),
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(matches!(fit_hyperparameters(&data, &config), Err(Error::Config(_))));
    }

    #[test]
    fn constant_series_pins_output_scale_low() {
        let data = TimeSeries::from_values(vec![0.0; 40]).unwrap();
        let out = fit_hyperparameters(&data, &FitConfig::default()).unwrap();
        assert!(out.feature.sigma_f < 1.05e-3, "{:?}", out.feature);
        assert!(out.feature.sigma_n < 0.1 * 1.0001, "{:?}", out.feature);
    }

    #[test]
    fn every_restart_is_monotone() {
        let data = TimeSeries::from_values(
            (0..30)
                .map(|i| (i as f64 / 3.0).sin() + 0.05 * (i % 3) as f64)
                .collect(),
        )
        .unwrap();
        let out = fit_hyperparameters(&data, &FitConfig::default()).unwrap();
        for t in &out.restarts {
            assert!(t.objective >= t.initial_objective, "{t:?}");
        }
        assert!(out
            .restarts
            .iter()
            .all(|t| out.log_likelihood >= t.objective - TIE_TOLERANCE));
    }
}
