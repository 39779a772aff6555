use vix_mathcore::norm_cdf;

use crate::leading::{leading_prices, scaled_g_integral, support};
use crate::proxy::{Component, MixedInputs, MixedProxyParams};
use crate::{MixedError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Payoff {
    Call,
    Put,
    Future,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakOptions {
    /// Finite-difference step in mu.
    pub step: f64,
    /// Keep the root A at its unshifted value while differentiating.
    pub freeze_root: bool,
}

impl Default for WeakOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            freeze_root: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakPrice {
    pub main: f64,
    pub correction: f64,
    pub price: f64,
    /// Operator terms P_{i,j}, indexed `[j][i-1]`.
    pub terms: [[f64; 3]; 2],
}

// Central stencils (offset, weight) for the first three derivatives.
const D0: &[(f64, f64)] = &[(0.0, 1.0)];
const D1: &[(f64, f64)] = &[(-1.0, -0.5), (1.0, 0.5)];
const D2: &[(f64, f64)] = &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)];

fn payoff_value(p: &MixedProxyParams, k: f64, payoff: Payoff, j: Component, frozen: Option<f64>) -> Result<f64> {
    match frozen {
        None => {
            let lp = leading_prices(p, k, j)?;
            Ok(match payoff {
                Payoff::Call => lp.call,
                Payoff::Put => lp.put,
                Payoff::Future => lp.future,
            })
        }
        Some(a_root) => {
            let f = p.jform(j)?;
            let (lo, hi) = support(&f);
            let a = a_root - p.sigma[j.index()] / 2.0;
            let ek = k.exp();
            Ok(match payoff {
                Payoff::Call => scaled_g_integral(&f, a.max(lo), hi) - ek * norm_cdf(-a_root),
                Payoff::Put => ek * norm_cdf(a_root) - scaled_g_integral(&f, lo, a.min(hi)),
                Payoff::Future => scaled_g_integral(&f, lo, hi),
            })
        }
    }
}

/// Weak approximation E[phi(VIX_P)] + sum_{i,j} gamma_{i,j} P_{i,j}.
///
/// `P_{i,1} = d_s d_t^{i-1} V(mu_1 + s + t, mu_2 + r t)` with `r = sigma_2/sigma_1`
/// (symmetrically for j = 2), evaluated by central differences with one
/// Richardson step.
pub fn weak_approx_price(inp: &MixedInputs, k: f64, payoff: Payoff, opts: WeakOptions) -> Result<WeakPrice> {
    let p = &inp.params;
    let j = p.default_component();
    let frozen = match (opts.freeze_root, payoff) {
        (true, Payoff::Call | Payoff::Put) => Some(p.root(k)?),
        _ => None,
    };
    let main = payoff_value(p, k, payoff, j, frozen)?;
    let v = |d1: f64, d2: f64| payoff_value(&p.shifted(d1, d2), k, payoff, j, frozen);

    let mut terms = [[0.0; 3]; 2];
    for c in [Component::First, Component::Second] {
        let ci = c.index();
        if !p.is_active(c) {
            continue;
        }
        for (i, s) in p.sigma.iter().enumerate() {
            if *s < 1e-6 {
                return Err(MixedError::DegenerateComponent { j: i + 1, sigma: *s });
            }
        }
        let ratio = p.sigma[1 - ci] / p.sigma[ci];
        for order in 1..=3usize {
            let inner = [D0, D1, D2][order - 1];
            let at = |h: f64| -> Result<f64> {
                let mut acc = 0.0;
                for &(a, wa) in D1 {
                    for &(b, wb) in inner {
                        let own = a * h + b * h;
                        let oth = b * h * ratio;
                        let (d1, d2) = if ci == 0 { (own, oth) } else { (oth, own) };
                        acc += wa * wb * v(d1, d2)?;
                    }
                }
                Ok(acc / h.powi(order as i32))
            };
            let coarse = at(opts.step)?;
            let fine = at(opts.step / 2.0)?;
            terms[ci][order - 1] = (4.0 * fine - coarse) / 3.0;
        }
    }
    let mut correction = 0.0;
    for ci in 0..2 {
        let g = inp.gammas[ci].as_array();
        for i in 0..3 {
            correction += g[i] * terms[ci][i];
        }
    }
    Ok(WeakPrice {
        main,
        correction,
        price: main + correction,
        terms,
    })
}
