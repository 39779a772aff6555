use std::sync::OnceLock;

use vix_mathcore::{gauss_legendre, norm_cdf};

use crate::proxy::{Component, JForm, MixedProxyParams};
use crate::Result;

/// Leading-order (gamma-free) mixture prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingPrices {
    pub call: f64,
    pub put: f64,
    pub future: f64,
    /// Root A used for the call and put.
    pub root: f64,
}

const TAIL: f64 = 15.0;
const PANEL: f64 = 0.5;

fn unit_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let r = gauss_legendre(16, -1.0f64, 1.0).expect("16-point rule");
        (r.nodes, r.weights)
    })
}

/// int_lo^hi f(y) dy by composite 16-point Gauss-Legendre.
pub(crate) fn composite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let (x, w) = unit_rule();
    let n = ((hi - lo) / PANEL).ceil().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    let mut total = 0.0;
    for p in 0..n {
        let mid = lo + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            acc += wi * f(mid + 0.5 * h * xi);
        }
        total += 0.5 * h * acc;
    }
    total
}

/// Range holding all but a negligible part of the mass of g_j * phi.
pub(crate) fn support(f: &JForm) -> (f64, f64) {
    let bump = if f.ln_c.is_finite() { 0.5 * f.dsigma } else { 0.0 };
    (bump.min(0.0) - TAIL, bump.max(0.0) + TAIL)
}

/// pre_j * int_lo^hi g_j(y) phi(y) dy.
pub(crate) fn scaled_g_integral(f: &JForm, lo: f64, hi: f64) -> f64 {
    let c = -0.5 * (2.0 * std::f64::consts::PI).ln();
    composite(|y| (f.ln_pre + f.ln_g(y) + c - 0.5 * y * y).exp(), lo, hi)
}

/// Leading prices from the component-`j` integral representation.
pub fn leading_prices(p: &MixedProxyParams, k: f64, j: Component) -> Result<LeadingPrices> {
    let f = p.jform(j)?;
    let a_root = p.root(k)?;
    let a = a_root - p.sigma[j.index()] / 2.0;
    let (lo, hi) = support(&f);
    let upper = scaled_g_integral(&f, a.max(lo), hi);
    let lower = scaled_g_integral(&f, lo, a.min(hi));
    let ek = k.exp();
    Ok(LeadingPrices {
        call: upper - ek * norm_cdf(-a_root),
        put: ek * norm_cdf(a_root) - lower,
        future: upper + lower,
        root: a_root,
    })
}
