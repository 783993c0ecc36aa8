//! Nelder-Mead simplex search with dimension-adaptive coefficients.

pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct SimplexOptions {
    pub max_iters: usize,
    pub value_tol: f64,
    pub step_tol: f64,
    pub initial_step: f64,
}

fn diameter(points: &[Vec<f64>]) -> f64 {
    let best = &points[0];
    points[1..].iter().map(|p| p.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max)
}

/// Minimizes `f` starting from a simplex around `start`.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], opts: &SimplexOptions) -> SimplexOutcome {
    let n = start.len();
    let nf = n as f64;
    let alpha = 1.0;
    let gamma = 1.0 + 2.0 / nf;
    let rho = 0.75 - 1.0 / (2.0 * nf);
    let sigma = 1.0 - 1.0 / nf;

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    points.push(start.to_vec());
    for k in 0..n {
        let mut p = start.to_vec();
        p[k] += if p[k].abs() > 1e-3 { opts.initial_step * p[k].signum() } else { opts.initial_step };
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| f(p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while iterations < opts.max_iters {
        // Sort ascending by value; ties keep index order so runs are reproducible.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        points = order.iter().map(|&k| points[k].clone()).collect();
        values = order.iter().map(|&k| values[k]).collect();

        if values[n] - values[0] <= opts.value_tol && diameter(&points) <= opts.step_tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &points[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / nf;
            }
        }
        let worst = points[n].clone();
        for k in 0..n {
            trial[k] = centroid[k] + alpha * (centroid[k] - worst[k]);
        }
        let fr = f(&trial);
        if fr < values[0] {
            for k in 0..n {
                trial2[k] = centroid[k] + gamma * (trial[k] - centroid[k]);
            }
            let fe = f(&trial2);
            if fe < fr {
                points[n].copy_from_slice(&trial2);
                values[n] = fe;
            } else {
                points[n].copy_from_slice(&trial);
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            points[n].copy_from_slice(&trial);
            values[n] = fr;
            continue;
        }
        let outside = fr < values[n];
        for k in 0..n {
            trial2[k] = if outside { centroid[k] + rho * (trial[k] - centroid[k]) } else { centroid[k] + rho * (worst[k] - centroid[k]) };
        }
        let fc = f(&trial2);
        if (outside && fc <= fr) || (!outside && fc < values[n]) {
            points[n].copy_from_slice(&trial2);
            values[n] = fc;
            continue;
        }
        let best = points[0].clone();
        for j in 1..=n {
            for k in 0..n {
                points[j][k] = best[k] + sigma * (points[j][k] - best[k]);
            }
            values[j] = f(&points[j]);
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    SimplexOutcome { x: points[best].clone(), value: values[best], iterations, converged }
}
