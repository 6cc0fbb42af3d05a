//! Small unconstrained minimizers used by gadget synthesis.

use nalgebra::{DMatrix, DVector};

/// Nelder–Mead simplex search. Returns the best point and its value.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> (Vec<f64>, f64) {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= ftol * (values[0].abs() + ftol) {
            break;
        }

        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(rho * alpha);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].clone();
        for i in 1..=n {
            for (xi, bi) in simplex[i].iter_mut().zip(&best) {
                *xi = bi + sigma * (*xi - bi);
            }
            values[i] = f(&simplex[i]);
        }
        evals += n;
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best])
}

/// Levenberg–Marquardt on a residual vector with a central-difference
/// Jacobian. Minimizes `|r(x)|²`.
pub fn levenberg_marquardt(
    r: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    fd_step: f64,
    max_iters: usize,
    cost_tol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut res = r(&x);
    let mut cost: f64 = res.iter().map(|v| v * v).sum();
    let mut mu = 1e-3;

    for _ in 0..max_iters {
        if cost <= cost_tol {
            break;
        }
        let rows = res.len();
        let mut jac = DMatrix::<f64>::zeros(rows, n);
        let mut xp = x.clone();
        for j in 0..n {
            xp[j] = x[j] + fd_step;
            let plus = r(&xp);
            xp[j] = x[j] - fd_step;
            let minus = r(&xp);
            xp[j] = x[j];
            for i in 0..rows {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * fd_step);
            }
        }
        let rv = DVector::from_vec(res.clone());
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;

        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&jtr))) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let trial_res = r(&trial);
            let trial_cost: f64 = trial_res.iter().map(|v| v * v).sum();
            if trial_cost < cost {
                x = trial;
                res = trial_res;
                cost = trial_cost;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let (x, v) = nelder_mead(&rosenbrock, &[-1.2, 1.0], 0.5, 5_000, 1e-16);
        assert!(v < 1e-10, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn lm_rosenbrock_residuals() {
        let r = |x: &[f64]| vec![1.0 - x[0], 10.0 * (x[1] - x[0] * x[0])];
        let (x, cost) = levenberg_marquardt(&r, &[-1.2, 1.0], 1e-6, 200, 1e-28);
        assert!(cost < 1e-20);
        assert!((x[0] - 1.0).abs() < 1e-9);
    }
}
