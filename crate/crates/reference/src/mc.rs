use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use vix_mathcore::gauss_legendre;
use vix_model::{AnyModel, KernelKind, KernelSpec, ModelError, VixContract};

use crate::components::components;
use crate::{Payoff, RefError, Result};

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    /// Total number of VIX samples; with antithetic sampling, pairs count twice.
    pub paths: usize,
    /// Intervals of the trapezoid grid over [T, T + Delta].
    pub time_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// Draws per RNG stream; fixes the reduction layout, not the thread count.
    pub chunk: usize,
    /// Gauss-Legendre nodes for the covariance time integrals.
    pub cov_nodes: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            time_steps: 150,
            seed: 20_240_601,
            antithetic: true,
            chunk: 2048,
            cov_nodes: 120,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 1000 {
            return Err(RefError::Config(format!("paths = {} < 1000", self.paths)));
        }
        if self.time_steps < 10 {
            return Err(RefError::Config(format!("time_steps = {} < 10", self.time_steps)));
        }
        if self.chunk == 0 || self.cov_nodes < 2 {
            return Err(RefError::Config("chunk and cov_nodes must be positive".into()));
        }
        Ok(())
    }

    fn draws(&self) -> usize {
        if self.antithetic {
            self.paths.div_ceil(2)
        } else {
            self.paths
        }
    }
}

/// Price with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    /// Independent samples behind the estimate (pairs when antithetic).
    pub samples: usize,
}

/// Simulated VIX values at one maturity. Antithetic partners are adjacent.
#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    pub vix: Vec<f64>,
    pub antithetic: bool,
    pub t: f64,
    pub seed: u64,
    pub threads: usize,
}

impl McSample {
    pub fn estimate(&self, payoff: Payoff, k: f64) -> McEstimate {
        let strike = k.exp();
        let vals: Vec<f64> = if self.antithetic {
            self.vix
                .chunks_exact(2)
                .map(|p| 0.5 * (payoff.apply(p[0], strike) + payoff.apply(p[1], strike)))
                .collect()
        } else {
            self.vix.iter().map(|&v| payoff.apply(v, strike)).collect()
        };
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        McEstimate {
            price: mean,
            std_error: (var / n).sqrt(),
            samples: vals.len(),
        }
    }
}

/// Gaussian field X on the u-grid, unit scale: Y_j = scale_j X - scale_j^2 d / 2.
enum Field {
    Dense(DMatrix<f64>),
    RankOne(Vec<f64>),
}

struct Grid {
    field: Field,
    /// Var X^u.
    diag: Vec<f64>,
    /// Trapezoid weight * xi(u) / Delta.
    w: Vec<f64>,
    comps: Vec<(f64, f64)>,
}

fn unit_field(kernel: &KernelSpec<f64>, t: f64, offsets: &[f64], nodes: usize) -> Result<(Field, Vec<f64>)> {
    match *kernel {
        KernelSpec::Exponential { kappa, .. } => {
            let v = -(-2.0 * kappa * t).exp_m1() / (2.0 * kappa);
            let a: Vec<f64> = offsets.iter().map(|d| (-kappa * d).exp() * v.sqrt()).collect();
            let diag = a.iter().map(|x| x * x).collect();
            Ok((Field::RankOne(a), diag))
        }
        KernelSpec::PowerLaw { hurst, .. } => {
            let n = offsets.len();
            let hm = hurst - 0.5;
            let two_h = 2.0 * hurst;
            // T - t = T s^6 tames the (u - t)^{H - 1/2} singularity at u = T.
            let rule = gauss_legendre(nodes, 0.0f64, 1.0)?;
            let (r, wr): (Vec<f64>, Vec<f64>) =
                rule.iter().map(|(s, w)| (t * s.powi(6), 6.0 * t * s.powi(5) * w)).unzip();
            let kern: Vec<Vec<f64>> = offsets
                .iter()
                .map(|d| r.iter().map(|ri| (d + ri).powf(hm)).collect())
                .collect();
            let diag: Vec<f64> = offsets
                .iter()
                .map(|d| ((d + t).powf(two_h) - d.powf(two_h)) / two_h)
                .collect();
            let mut cov = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                cov[(i, i)] = diag[i];
                for j in 0..i {
                    let mut acc = 0.0;
                    for q in 0..r.len() {
                        acc += wr[q] * kern[i][q] * kern[j][q];
                    }
                    cov[(i, j)] = acc;
                    cov[(j, i)] = acc;
                }
            }
            let scale = diag.iter().sum::<f64>() / n as f64;
            let mut jitter = 1e-12;
            loop {
                let mut m = cov.clone();
                for i in 0..n {
                    m[(i, i)] += jitter * scale;
                }
                if let Some(ch) = Cholesky::new(m) {
                    return Ok((Field::Dense(ch.l()), diag));
                }
                if jitter >= 1e-8 {
                    return Err(RefError::Covariance { jitter });
                }
                jitter *= 10.0;
            }
        }
    }
}

fn build_grid(m: &AnyModel, c: &VixContract<f64>, cfg: &McConfig) -> Result<Grid> {
    let (comps, curve) = components(m);
    let n = cfg.time_steps;
    let h = c.delta / n as f64;
    let offsets: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut w = Vec::with_capacity(n + 1);
    for (i, d) in offsets.iter().enumerate() {
        let u = c.t + d;
        let xi = curve.level(u).ok_or(ModelError::CurveDomain {
            from: c.t,
            to: c.window_end(),
        })?;
        let tw = if i == 0 || i == n { 0.5 * h } else { h };
        w.push(tw * xi / c.delta);
    }
    let (field, diag) = unit_field(&comps[0].kernel, c.t, &offsets, cfg.cov_nodes)?;
    Ok(Grid {
        field,
        diag,
        w,
        comps: comps.iter().map(|cp| (cp.weight, cp.kernel.scale())).collect(),
    })
}

impl Grid {
    fn dim(&self) -> usize {
        match &self.field {
            Field::Dense(l) => l.ncols(),
            Field::RankOne(_) => 1,
        }
    }

    fn field(&self, z: &[f64], x: &mut [f64]) {
        match &self.field {
            Field::Dense(l) => {
                for (i, xi) in x.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..=i {
                        acc += l[(i, j)] * z[j];
                    }
                    *xi = acc;
                }
            }
            Field::RankOne(a) => {
                for (xi, ai) in x.iter_mut().zip(a) {
                    *xi = ai * z[0];
                }
            }
        }
    }

    fn vix(&self, x: &[f64], sign: f64) -> f64 {
        let mut total = 0.0;
        for &(lam, s) in &self.comps {
            let mut acc = 0.0;
            for i in 0..x.len() {
                acc += self.w[i] * (s * sign * x[i] - 0.5 * s * s * self.diag[i]).exp();
            }
            total += lam * acc;
        }
        total.sqrt()
    }
}

/// Simulate VIX_T on the discretised window.
pub fn mc_simulate(m: &AnyModel, c: &VixContract<f64>, cfg: &McConfig) -> Result<McSample> {
    cfg.validate()?;
    c.validate()?;
    let grid = build_grid(m, c, cfg)?;
    let draws = cfg.draws();
    let chunks = draws.div_ceil(cfg.chunk);
    let dim = grid.dim();
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(ci as u64);
            let count = cfg.chunk.min(draws - ci * cfg.chunk);
            let mut z = vec![0.0; dim];
            let mut x = vec![0.0; grid.w.len()];
            let mut out = Vec::with_capacity(if cfg.antithetic { 2 * count } else { count });
            for _ in 0..count {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                grid.field(&z, &mut x);
                out.push(grid.vix(&x, 1.0));
                if cfg.antithetic {
                    out.push(grid.vix(&x, -1.0));
                }
            }
            out
        })
        .collect();
    Ok(McSample {
        vix: parts.concat(),
        antithetic: cfg.antithetic,
        t: c.t,
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
    })
}

/// Monte Carlo price for either kernel family.
pub fn mc_price(m: &AnyModel, c: &VixContract<f64>, payoff: Payoff, cfg: &McConfig) -> Result<McEstimate> {
    Ok(mc_simulate(m, c, cfg)?.estimate(payoff, c.k))
}

/// Monte Carlo price, restricted to power-law kernels.
pub fn mc_price_powerlaw(m: &AnyModel, c: &VixContract<f64>, payoff: Payoff, cfg: &McConfig) -> Result<McEstimate> {
    if m.kernel_kind() != KernelKind::PowerLaw {
        return Err(RefError::WrongPricer("mc_price_powerlaw needs power-law kernels".into()));
    }
    mc_price(m, c, payoff, cfg)
}
