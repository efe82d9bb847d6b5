//! Dense BFGS with a backtracking Armijo line search.

/// Outcome of a local minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Stopped on the relative-decrease or gradient test rather than the cap.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop when `(f_old - f_new) <= rel_tol * max(|f_old|, tiny)`.
    pub rel_tol: f64,
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iterations: 500,
            rel_tol: 1e-10,
            grad_tol: 1e-14,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, where `f(x, grad)` returns the value and fills `grad`.
pub fn bfgs<F>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    // Inverse Hessian approximation, row-major.
    let mut h = identity(n);
    let mut scaled = false;

    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];

    for iter in 0..opts.max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= opts.grad_tol || !fx.is_finite() {
            return Minimum { x, value: fx, iterations: iter, converged: fx.is_finite() };
        }
        for i in 0..n {
            dir[i] = -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            // Not a descent direction: restart from steepest descent.
            h = identity(n);
            scaled = false;
            for i in 0..n {
                dir[i] = -g[i];
            }
            slope = -gnorm * gnorm;
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                let decrease = fx - f_new;
                let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
                let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
                let sy = dot(&s, &y);
                if sy > 1e-300 {
                    if !scaled {
                        let gamma = sy / dot(&y, &y);
                        for v in h.iter_mut() {
                            *v *= gamma;
                        }
                        scaled = true;
                    }
                    update_inverse(&mut h, &s, &y, sy);
                }
                x.copy_from_slice(&x_new);
                g.copy_from_slice(&g_new);
                let f_old = fx;
                fx = f_new;
                accepted = true;
                if decrease <= opts.rel_tol * f_old.abs().max(1e-300) {
                    return Minimum { x, value: fx, iterations: iter + 1, converged: true };
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No decrease along any step: a stationary point to working precision.
            return Minimum { x, value: fx, iterations: iter + 1, converged: true };
        }
    }
    Minimum {
        x,
        value: fx,
        iterations: opts.max_iterations,
        converged: false,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

// H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
fn update_inverse(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
