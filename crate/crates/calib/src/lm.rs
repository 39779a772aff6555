use nalgebra::{DMatrix, DVector};

/// Stopping rules for [`least_squares`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when |step| / (|p| + 1e-12) falls below this.
    pub step_tol: f64,
    /// Relative forward-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            step_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// 0.5 |r|^2 at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// (cost before, cost after) of each accepted step, under the same context.
    pub accepted: Vec<(f64, f64)>,
}

/// Residual model whose evaluation may depend on a per-iteration context
/// that is frozen while the Jacobian and the trial step are computed.
pub trait Residuals {
    type Ctx;
    type Error;
    fn context(&self, x: &[f64]) -> Result<Self::Ctx, Self::Error>;
    fn eval(&self, x: &[f64], ctx: &Self::Ctx) -> Result<Vec<f64>, Self::Error>;
}

fn cost(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

/// Box-projected Levenberg-Marquardt with a forward-difference Jacobian.
///
/// Only steps that lower the cost are accepted. Errors from trial points are
/// treated as infinite cost; an error at the starting point is returned.
pub fn least_squares<P: Residuals>(
    prob: &P,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: LmOptions,
) -> Result<LmReport, P::Error> {
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lo, hi);
    let mut ctx = prob.context(&x)?;
    let mut r = prob.eval(&x, &ctx)?;
    let mut mu = 1e-3;
    let mut accepted = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut fresh = true;
    while iterations < opts.max_iter {
        iterations += 1;
        if !fresh {
            ctx = prob.context(&x)?;
            r = prob.eval(&x, &ctx)?;
        }
        fresh = false;
        let c0 = cost(&r);
        if c0 == 0.0 {
            converged = true;
            break;
        }
        let m = r.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        let mut jac_ok = true;
        for i in 0..n {
            let mut h = opts.fd_step * x[i].abs().max(1e-2);
            if x[i] + h > hi[i] {
                h = -h;
            }
            let mut xp = x.clone();
            xp[i] += h;
            match prob.eval(&xp, &ctx) {
                Ok(rp) => {
                    for k in 0..m {
                        jac[(k, i)] = (rp[k] - r[k]) / h;
                    }
                }
                Err(_) => jac_ok = false,
            }
        }
        if !jac_ok {
            break;
        }
        let rv = DVector::from_vec(r.clone());
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * rv;
        // Variables pinned at a bound with the gradient pointing outward stay put.
        let pinned: Vec<bool> = (0..n)
            .map(|i| (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0))
            .collect();
        let mut step_taken = false;
        while mu < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += mu * (jtj[(i, i)] + 1e-12);
                if pinned[i] {
                    for k in 0..n {
                        a[(i, k)] = 0.0;
                        a[(k, i)] = 0.0;
                    }
                    a[(i, i)] = 1.0;
                }
            }
            let mut g = g.clone();
            for i in 0..n {
                if pinned[i] {
                    g[i] = 0.0;
                }
            }
            let Some(delta) = a.lu().solve(&(-&g)) else {
                mu *= 4.0;
                continue;
            };
            let mut xt: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            project(&mut xt, lo, hi);
            let step: f64 = xt.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let size: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if step <= opts.step_tol * (size + 1e-12) {
                converged = true;
                break;
            }
            match prob.eval(&xt, &ctx) {
                Ok(rt) if cost(&rt) < c0 => {
                    accepted.push((c0, cost(&rt)));
                    let rel = step / (size + 1e-12);
                    x = xt;
                    r = rt;
                    mu = (mu / 3.0).max(1e-12);
                    step_taken = true;
                    if rel < opts.step_tol {
                        converged = true;
                    }
                    break;
                }
                _ => mu *= 4.0,
            }
        }
        if converged {
            break;
        }
        if !step_taken {
            // No descent at any damping: a stationary point of the box problem.
            converged = true;
            break;
        }
    }
    let ctx = prob.context(&x)?;
    let r = prob.eval(&x, &ctx)?;
    Ok(LmReport {
        cost: cost(&r),
        residuals: r,
        x,
        iterations,
        converged,
        accepted,
    })
}
