use vix_mathcore::{find_root, gauss_legendre, norm_pdf};
use vix_model::{AnyModel, KernelKind, KernelSpec, VixContract};

use crate::components::{components, kind_of};
use crate::{Payoff, RefError, Result};

/// Outer (probability) and inner (window) Gauss-Legendre node counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadNodes {
    pub outer: usize,
    pub inner: usize,
}

impl Default for QuadNodes {
    fn default() -> Self {
        Self { outer: 120, inner: 120 }
    }
}

impl QuadNodes {
    pub fn doubled(&self) -> Self {
        Self {
            outer: 2 * self.outer,
            inner: 2 * self.inner,
        }
    }
}

/// Half-width of the standardised window; the normal mass beyond is below 1e-32.
const Z_HALF: f64 = 12.0;

struct Window {
    /// Per component: weight, omega.
    comps: Vec<(f64, f64)>,
    /// e^{-kappa (u - T)} at the inner nodes.
    decay: Vec<f64>,
    /// Node weight * xi(u) / Delta.
    w: Vec<f64>,
    /// Variance of G.
    v: f64,
}

impl Window {
    fn vix(&self, g: f64) -> f64 {
        let mut total = 0.0;
        for &(lam, om) in &self.comps {
            let mut acc = 0.0;
            for (e, w) in self.decay.iter().zip(&self.w) {
                let a = om * e;
                acc += w * (a * g - 0.5 * a * a * self.v).exp();
            }
            total += lam * acc;
        }
        total.sqrt()
    }
}

/// Price of a VIX call, put or future under exponential kernels.
///
/// All components share `G = int_0^T e^{-kappa (T - t)} dW_t`, so the VIX is a
/// deterministic increasing function of G. The expectation over G is a
/// Gauss-Legendre rule in the standardised variable, split at the payoff kink.
pub fn quad_price_exponential(m: &AnyModel, c: &VixContract<f64>, payoff: Payoff, nodes: QuadNodes) -> Result<f64> {
    c.validate()?;
    if kind_of(m) != KernelKind::Exponential {
        return Err(RefError::WrongPricer("quadrature pricer needs exponential kernels".into()));
    }
    let (comps, curve) = components(m);
    let kappa = comps[0].kernel.decay();
    let mut decay = Vec::new();
    let mut w = Vec::new();
    for (a, b, level) in curve.pieces(c.t, c.window_end())? {
        let r = gauss_legendre(nodes.inner, a, b)?;
        for (u, wu) in r.iter() {
            decay.push((-kappa * (u - c.t)).exp());
            w.push(wu * level / c.delta);
        }
    }
    let win = Window {
        comps: comps
            .iter()
            .map(|cp| match cp.kernel {
                KernelSpec::Exponential { omega, .. } => (cp.weight, omega),
                KernelSpec::PowerLaw { .. } => unreachable!(),
            })
            .collect(),
        decay,
        w,
        v: -(-2.0 * kappa * c.t).exp_m1() / (2.0 * kappa),
    };
    let sd = win.v.sqrt();
    let strike = c.k.exp();
    if sd == 0.0 {
        return Ok(payoff.apply(win.vix(0.0), strike));
    }
    // z = G/sd; the right edge carries the largest exponential tilt.
    let tilt = win.comps.iter().map(|c| c.1).fold(0.0, f64::max) * sd;
    let (z_lo, z_hi) = (-Z_HALF, Z_HALF + tilt);
    let integrate = |lo: f64, hi: f64| -> Result<f64> {
        if !(hi > lo) {
            return Ok(0.0);
        }
        let r = gauss_legendre(nodes.outer, lo, hi)?;
        Ok(r.integrate(|z| norm_pdf(z) * payoff.apply(win.vix(sd * z), strike)))
    };
    if payoff == Payoff::Future {
        return integrate(z_lo, z_hi);
    }
    let f = |z: f64| win.vix(sd * z) - strike;
    let z_star = if f(z_lo) >= 0.0 {
        z_lo
    } else if f(z_hi) <= 0.0 {
        z_hi
    } else {
        find_root(f, z_lo, z_hi, 1e-14)?
    };
    match payoff {
        Payoff::Call => integrate(z_star, z_hi),
        Payoff::Put => integrate(z_lo, z_star),
        Payoff::Future => unreachable!(),
    }
}
