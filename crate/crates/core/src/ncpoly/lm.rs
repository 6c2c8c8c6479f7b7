//! Damped Gauss-Newton (Levenberg) with a forward-difference Jacobian.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevenbergOptions {
    pub max_iter: usize,
    pub lambda0: f64,
    /// Stop as soon as `done(x)` is true or the damping exceeds this.
    pub lambda_max: f64,
}

impl Default for LevenbergOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            lambda0: 1e-3,
            lambda_max: 1e12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevenbergOutcome {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes `||residual(x)||^2`. `done` is checked on every accepted point,
/// including the start; returning true ends the search.
pub fn levenberg(
    residual: impl Fn(&[f64]) -> Vec<f64>,
    done: impl Fn(&[f64]) -> bool,
    x0: Vec<f64>,
    opts: &LevenbergOptions,
) -> LevenbergOutcome {
    let mut x = x0;
    let mut r = residual(&x);
    let mut current = cost(&r);
    let mut lambda = opts.lambda0;
    let mut iterations = 0;
    let p = x.len();

    if done(&x) || p == 0 {
        return LevenbergOutcome {
            x,
            cost: current,
            iterations,
        };
    }

    'outer: while iterations < opts.max_iter {
        iterations += 1;
        let m = r.len();
        // J is m x p, column major
        let mut jac = vec![0.0; m * p];
        for i in 0..p {
            let h = 1e-7 * x[i].abs().max(1.0);
            let mut xh = x.clone();
            xh[i] += h;
            let rh = residual(&xh);
            for k in 0..m {
                jac[i * m + k] = (rh[k] - r[k]) / h;
            }
        }
        let mut jtj = vec![0.0; p * p];
        let mut jtr = vec![0.0; p];
        for i in 0..p {
            let ci = &jac[i * m..(i + 1) * m];
            jtr[i] = ci.iter().zip(&r).map(|(a, b)| a * b).sum();
            for j in 0..=i {
                let cj = &jac[j * m..(j + 1) * m];
                let v: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
                jtj[i * p + j] = v;
                jtj[j * p + i] = v;
            }
        }

        loop {
            let mut damped = jtj.clone();
            for i in 0..p {
                damped[i * p + i] += lambda;
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let step = match cholesky_solve(&mut damped, p, rhs) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    if lambda > opts.lambda_max {
                        break 'outer;
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let r_trial = residual(&trial);
            let c_trial = cost(&r_trial);
            if c_trial.is_finite() && c_trial < current {
                let step_norm = step.iter().map(|v| v * v).sum::<f64>().sqrt();
                let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x = trial;
                r = r_trial;
                current = c_trial;
                lambda = (lambda / 10.0).max(1e-15);
                if done(&x) || step_norm <= 1e-15 * x_norm.max(1.0) {
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > opts.lambda_max {
                break 'outer;
            }
        }
    }
    LevenbergOutcome {
        x,
        cost: current,
        iterations,
    }
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major, overwritten).
fn cholesky_solve(a: &mut [f64], p: usize, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for j in 0..p {
        let mut diag = a[j * p + j];
        for k in 0..j {
            diag -= a[j * p + k] * a[j * p + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let l_jj = diag.sqrt();
        a[j * p + j] = l_jj;
        for i in (j + 1)..p {
            let mut v = a[i * p + j];
            for k in 0..j {
                v -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = v / l_jj;
        }
    }
    for i in 0..p {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * p + k] * b[k];
        }
        b[i] = v / a[i * p + i];
    }
    for i in (0..p).rev() {
        let mut v = b[i];
        for k in (i + 1)..p {
            v -= a[k * p + i] * b[k];
        }
        b[i] = v / a[i * p + i];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let res = |x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]];
        let out = levenberg(res, |_| false, vec![-1.2, 1.0], &LevenbergOptions::default());
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{out:?}");
    }

    #[test]
    fn done_at_start_means_no_iterations() {
        let out = levenberg(|x: &[f64]| vec![x[0]], |_| true, vec![3.0], &LevenbergOptions::default());
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![3.0]);
    }

    #[test]
    fn cholesky_small_system() {
        let mut a = vec![4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&mut a, 2, vec![2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-14);
        let mut singular = vec![1.0, 1.0, 1.0, 1.0];
        assert!(cholesky_solve(&mut singular, 2, vec![1.0, 1.0]).is_none());
    }
}
