//! Bounded Nelder–Mead simplex minimization.
//!
//! Trial points are projected onto the box before evaluation, so the simplex
//! never leaves the feasible region. Non-finite objective values are treated
//! as `+inf`.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex, per coordinate.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop when the spread of objective values over the simplex drops below this.
    pub f_tolerance: f64,
    /// ...and the simplex diameter (max-norm) drops below this.
    pub x_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            initial_step: 0.5,
            max_evaluations: 2000,
            f_tolerance: 1e-10,
            x_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(*lo, *hi);
    }
}

/// Minimize `f` over the box `[lower, upper]` starting from `x0`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let evaluations = std::cell::Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut start = x0.to_vec();
    project(&mut start, lower, upper);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(&start);
    simplex.push((start.clone(), f0));
    for i in 0..dim {
        let mut p = start.clone();
        // step away from the nearer bound so the vertex stays distinct
        let step = if p[i] + opts.initial_step <= upper[i] {
            opts.initial_step
        } else {
            -opts.initial_step
        };
        p[i] += step;
        project(&mut p, lower, upper);
        let fp = eval(&p);
        simplex.push((p, fp));
    }

    let mut converged = false;
    while evaluations.get() < opts.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let spread = if worst.is_finite() { worst - best } else { f64::INFINITY };
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.f_tolerance && diameter <= opts.x_tolerance {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(p, _)| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            project(&mut p, lower, upper);
            p
        };

        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[dim].1 {
            let p = along(0.5);
            let fp = eval(&p);
            (p, fp)
        } else {
            let p = along(-0.5);
            let fp = eval(&p);
            (p, fp)
        };
        if fc < simplex[dim].1.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for (p, fp) in simplex[1..].iter_mut() {
            for (pk, bk) in p.iter_mut().zip(&best_x) {
                *pk = bk + 0.5 * (*pk - bk);
            }
            *fp = eval(p);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        evaluations: evaluations.get(),
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evaluations: 5000,
            ..Default::default()
        };
        let r = nelder_mead(rosen, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn respects_bounds() {
        let r = nelder_mead(
            |x: &[f64]| x[0] + x[1],
            &[0.5, 0.5],
            &[0.0, 0.2],
            &[1.0, 1.0],
            &NelderMeadOptions::default(),
        );
        assert!((r.x[0] - 0.0).abs() < 1e-6 && (r.x[1] - 0.2).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.0).abs();
        let x0 = [0.0, 0.0];
        let r = nelder_mead(f, &x0, &[-10.0; 2], &[10.0; 2], &NelderMeadOptions::default());
        assert!(r.value <= f(&x0));
    }

    #[test]
    fn non_finite_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.1).powi(2) };
        let r = nelder_mead(f, &[2.0], &[-1.0], &[3.0], &NelderMeadOptions::default());
        assert!((r.x[0] - 0.1).abs() < 1e-5);
    }
}
