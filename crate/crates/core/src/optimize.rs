//! Nelder–Mead simplex minimization.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions<F> {
    /// Objective evaluations allowed, including the initial simplex.
    pub max_evals: usize,
    /// Stop once every vertex is within this distance of the best one
    /// (coordinate-wise) ...
    pub xtol: F,
    /// ... and the function spread is at most this.
    pub ftol: F,
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: F,
}

impl<F: Real> Default for NelderMeadOptions<F> {
    fn default() -> Self {
        Self { max_evals: 500, xtol: F::of(1e-4), ftol: F::of(1e-10), initial_step: F::of(0.1) }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum<F> {
    pub x: Vec<F>,
    pub value: F,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. The result is never worse than `f(x0)`; with
/// `max_evals = 0` it is `x0` itself, unevaluated (`value` is NaN).
pub fn nelder_mead<F: Real>(
    mut f: impl FnMut(&[F]) -> F,
    x0: &[F],
    opts: &NelderMeadOptions<F>,
) -> Minimum<F> {
    let dim = x0.len();
    if opts.max_evals == 0 || dim == 0 {
        let (value, evaluations) = if dim == 0 && opts.max_evals > 0 { (f(x0), 1) } else { (F::nan(), 0) };
        return Minimum { x: x0.to_vec(), value, evaluations, converged: dim == 0 };
    }
    let (alpha, gamma, rho, sigma) = (F::one(), F::of(2.0), F::of(0.5), F::of(0.5));
    let mut evals = 0usize;
    let mut eval = |x: &[F], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<F>, F)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        if evals >= opts.max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] = x[i] + opts.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut converged = false;
    if simplex.len() == dim + 1 {
        loop {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let best = simplex[0].clone();
            let spread_f = simplex[dim].1 - best.1;
            let spread_x = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (*a - *b).abs()))
                .fold(F::zero(), F::max);
            if spread_x <= opts.xtol && spread_f <= opts.ftol.max(F::epsilon()) {
                converged = true;
                break;
            }
            if evals >= opts.max_evals {
                break;
            }
            let centroid: Vec<F> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<F>() / F::of(dim as f64))
                .collect();
            let along = |t: F| -> Vec<F> {
                centroid.iter().zip(&simplex[dim].0).map(|(c, w)| *c + t * (*c - *w)).collect()
            };
            let reflected = along(alpha);
            let fr = eval(&reflected, &mut evals);
            if fr < simplex[0].1 {
                if evals >= opts.max_evals {
                    simplex[dim] = (reflected, fr);
                    continue;
                }
                let expanded = along(gamma);
                let fe = eval(&expanded, &mut evals);
                simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
            } else {
                if evals >= opts.max_evals {
                    if fr < simplex[dim].1 {
                        simplex[dim] = (reflected, fr);
                    }
                    continue;
                }
                let (contracted, fc) = if fr < simplex[dim].1 {
                    let c = along(rho);
                    let v = eval(&c, &mut evals);
                    (c, v)
                } else {
                    let c = along(-rho);
                    let v = eval(&c, &mut evals);
                    (c, v)
                };
                if fc < fr.min(simplex[dim].1) {
                    simplex[dim] = (contracted, fc);
                } else {
                    let best_x = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        if evals >= opts.max_evals {
                            break;
                        }
                        let x: Vec<F> = best_x.iter().zip(&vertex.0).map(|(b, v)| *b + sigma * (*v - *b)).collect();
                        let v = eval(&x, &mut evals);
                        *vertex = (x, v);
                    }
                }
            }
        }
    }
    let (x, value) = simplex
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("simplex has the initial vertex");
    Minimum { x, value, evaluations: evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions { max_evals: 2000, xtol: 1e-8, ftol: 1e-14, initial_step: 0.5 };
        let m = nelder_mead(rosen, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn respects_budget_and_never_worsens() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2) + x[2].abs();
        for budget in [1, 2, 3, 4, 7, 50] {
            let mut calls = 0;
            let m = nelder_mead(
                |x| {
                    calls += 1;
                    f(x)
                },
                &[0.0, 0.0, 0.0],
                &NelderMeadOptions { max_evals: budget, ..Default::default() },
            );
            assert!(calls <= budget);
            assert_eq!(m.evaluations, calls);
            assert!(m.value <= f(&[0.0, 0.0, 0.0]));
        }
        let m = nelder_mead(f, &[0.5, 0.5, 0.5], &NelderMeadOptions { max_evals: 0, ..Default::default() });
        assert_eq!(m.x, vec![0.5, 0.5, 0.5]);
        assert_eq!(m.evaluations, 0);
    }

    #[test]
    fn works_in_single_precision() {
        let m = nelder_mead(|x: &[f32]| (x[0] - 0.25).powi(2), &[0.0f32], &NelderMeadOptions::default());
        assert!((m.x[0] - 0.25).abs() < 1e-3);
    }
}
