//! Dense reference implementations used as test oracles. Nothing here calls
//! into the library's linear algebra: the kernel, the inverse and the
//! determinant are all written out directly.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matern52(sigma_f: f64, sigma_l: f64, a: f64, b: f64) -> f64 {
    let r = (a - b).abs();
    let s = 5f64.sqrt() * r / sigma_l;
    sigma_f * sigma_f * (1.0 + s + s * s / 3.0) * (-s).exp()
}

pub fn squared_exponential(h: f64, lambda: f64, a: f64, b: f64) -> f64 {
    let u = (a - b) / lambda;
    h * h * (-u * u).exp()
}

pub type Mat = Vec<Vec<f64>>;

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        assert!(p != 0.0, "singular matrix");
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Log-determinant of a positive-determinant matrix via LU with partial pivoting.
pub fn log_det(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut acc = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        acc += p.abs().ln();
        for row in col + 1..n {
            let f = m[row][col] / p;
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    acc
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Parameters of a Matern 5/2 model with constant mean.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub sigma_f: f64,
    pub sigma_l: f64,
    pub sigma_n: f64,
    pub mean: f64,
}

impl Oracle {
    pub fn k(&self, a: f64, b: f64) -> f64 {
        matern52(self.sigma_f, self.sigma_l, a, b)
    }

    pub fn noisy_cov(&self, ts: &[f64]) -> Mat {
        ts.iter()
            .enumerate()
            .map(|(i, &a)| {
                ts.iter()
                    .enumerate()
                    .map(|(j, &b)| self.k(a, b) + if i == j { self.sigma_n * self.sigma_n } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Latent predictive mean and variance by explicit inversion.
    pub fn predict(&self, ts: &[f64], ys: &[f64], t_star: f64) -> (f64, f64) {
        if ts.is_empty() {
            return (self.mean, self.k(t_star, t_star));
        }
        let v_inv = inverse(&self.noisy_cov(ts));
        let k_star: Vec<f64> = ts.iter().map(|&t| self.k(t, t_star)).collect();
        let centered: Vec<f64> = ys.iter().map(|y| y - self.mean).collect();
        let mean = self.mean + dot(&k_star, &mat_vec(&v_inv, &centered));
        let var = self.k(t_star, t_star) - dot(&k_star, &mat_vec(&v_inv, &k_star));
        (mean, var)
    }

    pub fn log_marginal_likelihood(&self, ts: &[f64], ys: &[f64]) -> f64 {
        let v = self.noisy_cov(ts);
        let v_inv = inverse(&v);
        let centered: Vec<f64> = ys.iter().map(|y| y - self.mean).collect();
        let n = ts.len() as f64;
        -0.5 * dot(&centered, &mat_vec(&v_inv, &centered))
            - 0.5 * log_det(&v)
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Strictly increasing times with gaps in `[min_gap, max_gap)`.
pub fn random_times(rng: &mut impl Rng, n: usize, min_gap: f64, max_gap: f64) -> Vec<f64> {
    let mut t = rng.random_range(-5.0..5.0);
    (0..n)
        .map(|_| {
            t += rng.random_range(min_gap..max_gap);
            t
        })
        .collect()
}

/// Fitted `(sigma_l, sigma_f, sigma_n)` of the four nearest segments.
pub const NEAR_FEATURES: [(f64, f64, f64); 4] = [
    (2.0752, 0.8215, 0.1001),
    (2.4335, 0.8069, 0.1000),
    (2.2916, 0.8096, 0.1001),
    (2.1494, 0.8206, 0.1000),
];

/// Fitted `(sigma_l, sigma_f, sigma_n)` of the four farthest segments.
pub const FAR_FEATURES: [(f64, f64, f64); 4] = [
    (7.3899, 0.7773, 0.1000),
    (4.5846, 0.7778, 0.1007),
    (9.6141, 0.7897, 0.1001),
    (7.5284, 0.8471, 0.1003),
];

pub fn features(table: &[(f64, f64, f64)]) -> Vec<gptdf_core::TemporalFeature> {
    table
        .iter()
        .map(|&(l, f, n)| gptdf_core::TemporalFeature::new(f, l, n).unwrap())
        .collect()
}
