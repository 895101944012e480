use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::{Error, Result};

/// `|ts_a| x |ts_b|` matrix of pairwise kernel values.
pub fn build_covariance(kernel: &KernelSpec, ts_a: &[f64], ts_b: &[f64]) -> Result<DMatrix<f64>> {
    if ts_a.is_empty() || ts_b.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(DMatrix::from_fn(ts_a.len(), ts_b.len(), |i, j| {
        kernel.eval(ts_a[i], ts_b[j])
    }))
}

/// `K + noise_std^2 I`.
pub fn build_noisy_covariance(k: &DMatrix<f64>, noise_std: f64) -> Result<DMatrix<f64>> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "covariance must be square, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    let mut v = k.clone();
    let s2 = noise_std * noise_std;
    for i in 0..v.nrows() {
        v[(i, i)] += s2;
    }
    Ok(v)
}

/// Diagonal jitter tried when a plain Cholesky factorization fails.
///
/// Jitter is relative: the amount added is `level * trace(V) / n`. Levels go
/// `initial, initial * factor, ...` up to and including `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterSchedule {
    pub initial: f64,
    pub factor: f64,
    pub max: f64,
}

impl Default for JitterSchedule {
    fn default() -> Self {
        JitterSchedule {
            initial: 1e-10,
            factor: 10.0,
            max: 1e-4,
        }
    }
}

impl JitterSchedule {
    fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        let mut next = Some(self.initial);
        std::iter::from_fn(move || {
            let level = next?;
            let grown = level * self.factor;
            next = (self.factor > 1.0 && grown <= self.max * (1.0 + 1e-9)).then_some(grown);
            (level <= self.max * (1.0 + 1e-9)).then_some(level)
        })
    }
}

/// Cholesky factor of a (possibly jittered) covariance matrix.
#[derive(Debug, Clone)]
pub struct Factorization {
    chol: Cholesky<f64, Dyn>,
    /// Absolute amount added to the diagonal, zero if none was needed.
    pub jitter: f64,
}

/// Factorize a symmetric matrix, escalating diagonal jitter on failure.
pub fn factorize(v: &DMatrix<f64>, schedule: &JitterSchedule) -> Result<Factorization> {
    if let Some(chol) = Cholesky::new(v.clone()) {
        return Ok(Factorization { chol, jitter: 0.0 });
    }
    let n = v.nrows();
    let scale = (v.trace() / n as f64).abs().max(f64::MIN_POSITIVE);
    for level in schedule.levels() {
        let jitter = level * scale;
        let mut vj = v.clone();
        for i in 0..n {
            vj[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(vj) {
            return Ok(Factorization { chol, jitter });
        }
    }
    Err(Error::NotPositiveDefinite)
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// `L^{-1} b` via forward substitution.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let l = self.chol.l_dirty();
        let n = b.len();
        let mut x = b.clone();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= l[(i, j)] * x[j];
            }
            x[i] = s / l[(i, i)];
        }
        x
    }

    /// `L z`.
    pub fn mul_lower(&self, z: &DVector<f64>) -> DVector<f64> {
        let l = self.chol.l_dirty();
        let n = z.len();
        DVector::from_fn(n, |i, _| (0..=i).map(|j| l[(i, j)] * z[j]).sum())
    }

    pub fn log_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }
}
