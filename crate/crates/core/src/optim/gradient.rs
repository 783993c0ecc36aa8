//! Gradient descent on the unit sphere with finite-difference gradients.

use super::nelder_mead::SimplexOutcome;

const FD_STEP: f64 = 1e-6;

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// Central-difference gradient of `f` at `x`.
pub(crate) fn finite_difference_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + FD_STEP;
            let up = f(&probe);
            probe[k] = x[k] - FD_STEP;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Minimizes a scale-invariant `f` over unit vectors.
///
/// The gradient is projected onto the tangent space, a backtracking line
/// search picks the step, and the iterate is renormalized after each move.
pub(crate) fn projected_gradient<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    max_iters: usize,
    value_tol: f64,
    step_tol: f64,
) -> SimplexOutcome {
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut fx = f(&x);
    let mut step: f64 = 0.5;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let mut g = finite_difference_gradient(f, &x);
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        g.iter_mut().zip(&x).for_each(|(gi, xi)| *gi -= radial * xi);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm <= step_tol {
            converged = true;
            break;
        }
        // Barzilai-Borwein guess for the first trial step.
        if let Some((px, pg)) = &prev {
            let sy: f64 = x.iter().zip(px).zip(g.iter().zip(pg)).map(|((a, b), (c, d))| (a - b) * (c - d)).sum();
            let ss: f64 = x.iter().zip(px).map(|(a, b)| (a - b) * (a - b)).sum();
            if sy > 0.0 {
                step = (ss / sy).min(10.0);
            }
        }
        prev = Some((x.clone(), g.clone()));
        let mut accepted = false;
        while step * gnorm > 1e-14 {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            normalize(&mut trial);
            let ft = f(&trial);
            if ft <= fx - 1e-4 * step * gnorm * gnorm {
                let improvement = fx - ft;
                x = trial;
                fx = ft;
                accepted = true;
                if improvement <= value_tol {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    SimplexOutcome { x, value: fx, iterations, converged }
}
