//! Derivative-free minimizers used by the fitting pipeline: a bounded
//! Nelder–Mead simplex (box constraints by projection) and a golden-section
//! line search. Both are deterministic: no random restarts, no adaptive
//! shuffling, so identical inputs give identical iterates.

/// Options for one Nelder–Mead run.
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_iterations: usize,
    /// Stop when the simplex function spread falls below
    /// `f_tol_abs + f_tol_rel·|f_best|`.
    pub f_tol_abs: f64,
    pub f_tol_rel: f64,
    /// Stop when the simplex diameter (max coordinate spread) falls below this.
    pub x_tol: f64,
    /// Initial simplex edge length per coordinate.
    pub initial_step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            f_tol_abs: 1e-16,
            f_tol_rel: 1e-13,
            x_tol: 1e-11,
            initial_step: 0.15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn clamp_into(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Minimizes `f` over a box, starting from `start` (clamped into the box).
/// Candidate points outside the box are projected onto it before evaluation.
pub fn nelder_mead_bounded<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    bounds: &[(f64, f64)],
    opts: &NmOptions,
) -> NmResult {
    assert_eq!(start.len(), bounds.len());
    let dim = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], n: &mut usize| {
        *n += 1;
        f(x)
    };

    // Initial simplex: start plus one step along each coordinate, stepping
    // inward when the outward step would leave the box.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut x0 = start.to_vec();
    clamp_into(&mut x0, bounds);
    let f0 = eval(&x0, &mut evaluations);
    simplex.push((x0.clone(), f0));
    for i in 0..dim {
        let (lo, hi) = bounds[i];
        let step = opts.initial_step * (hi - lo).max(f64::MIN_POSITIVE);
        let mut x = x0.clone();
        x[i] = if x[i] + step <= hi { x[i] + step } else { x[i] - step };
        clamp_into(&mut x, bounds);
        let fx = eval(&x, &mut evaluations);
        simplex.push((x, fx));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

        let f_best = simplex[0].1;
        let f_worst = simplex[dim].1;
        let f_spread = f_worst - f_best;
        let x_spread = (0..dim)
            .map(|i| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for (x, _) in &simplex {
                    lo = lo.min(x[i]);
                    hi = hi.max(x[i]);
                }
                hi - lo
            })
            .fold(0.0_f64, f64::max);
        if f_spread <= opts.f_tol_abs + opts.f_tol_rel * f_best.abs() || x_spread <= opts.x_tol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (x, _) in simplex.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }

        let project = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp_into(&mut x, bounds);
            x
        };

        let reflected = project(alpha);
        let f_reflected = eval(&reflected, &mut evaluations);

        if f_reflected < simplex[0].1 {
            let expanded = project(gamma);
            let f_expanded = eval(&expanded, &mut evaluations);
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_reflected);
        } else {
            let contracted = if f_reflected < simplex[dim].1 {
                project(rho)
            } else {
                project(-rho)
            };
            let f_contracted = eval(&contracted, &mut evaluations);
            if f_contracted < simplex[dim].1.min(f_reflected) {
                simplex[dim] = (contracted, f_contracted);
            } else {
                // Shrink towards the best vertex.
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (v, b) in vertex.0.iter_mut().zip(&best) {
                        *v = b + sigma * (*v - b);
                    }
                    clamp_into(&mut vertex.0, bounds);
                    vertex.1 = eval(&vertex.0, &mut evaluations);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f_min) = simplex.swap_remove(0);
    NmResult {
        x,
        f: f_min,
        iterations,
        evaluations,
        converged,
    }
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`,
/// shrinking the bracket until its width falls below `x_tol`. Returns the
/// best evaluated point.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };

    while hi - lo > x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        let cand = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let res = nelder_mead_bounded(
            |x| (x[0] - 0.3).powi(2) + 2.0 * (x[1] - 1.7).powi(2),
            &[0.9, 0.1],
            &[(0.0, 1.0), (0.0, 5.0)],
            &NmOptions::default(),
        );
        assert!(res.converged);
        assert!((res.x[0] - 0.3).abs() < 1e-7, "x0 = {}", res.x[0]);
        assert!((res.x[1] - 1.7).abs() < 1e-7, "x1 = {}", res.x[1]);
    }

    #[test]
    fn respects_bounds_when_minimum_is_outside() {
        let res = nelder_mead_bounded(
            |x| (x[0] + 1.0).powi(2),
            &[0.5],
            &[(0.0, 1.0)],
            &NmOptions::default(),
        );
        assert!(res.x[0].abs() < 1e-9, "expected boundary hit, got {}", res.x[0]);
    }

    #[test]
    fn handles_valley_with_correlated_coordinates() {
        // Rosenbrock-like valley restricted to a box containing the minimum.
        let res = nelder_mead_bounded(
            |x| 10.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[0.2, 0.8],
            &[(-2.0, 2.0), (-2.0, 2.0)],
            &NmOptions {
                max_iterations: 2000,
                ..NmOptions::default()
            },
        );
        assert!((res.x[0] - 1.0).abs() < 1e-5);
        assert!((res.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn deterministic_across_runs() {
        let run = || {
            nelder_mead_bounded(
                |x| (x[0] - 0.123).powi(2) + (x[1] - 4.56).powi(2),
                &[0.9, 0.1],
                &[(0.0, 1.0), (0.0, 10.0)],
                &NmOptions::default(),
            )
        };
        let (a, b) = (run(), run());
        assert_eq!(a.x, b.x);
        assert_eq!(a.f, b.f);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn golden_section_finds_interior_minimum() {
        let (x, _) = golden_section_min(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-8);
        assert!((x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn golden_section_handles_boundary_minimum() {
        let (x, _) = golden_section_min(|x| x, 2.0, 3.0, 1e-8);
        assert!((x - 2.0).abs() < 1e-6);
    }
}
