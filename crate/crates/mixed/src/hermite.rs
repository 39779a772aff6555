use vix_mathcore::{gauss_hermite_prob, log_add_exp, norm_cdf, norm_pdf, QuadratureRule};
use vix_single::GammaCoefficients;

use crate::proxy::{Component, JForm, MixedInputs, MixedProxyParams};
use crate::{MixedError, Result};

pub const MAX_ORDER: usize = 25;
const NODES: usize = 400;
const CHECK_NODES: usize = 800;

/// Strike-independent Hermite weights of `g_1` and `g_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasis {
    pub order: usize,
    pub forms: [Option<JForm>; 2],
    /// `weights[j][i][n]` = d^i_{mu_1} omega_{n,j}; `None` for a zero-weight component.
    pub weights: [Option<[Vec<f64>; 4]>; 2],
}

/// Hermite basis pinned to one strike.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteLayer {
    pub basis: HermiteBasis,
    pub k: f64,
    /// A with h(A) = e^{2k}.
    pub root: f64,
    /// `c[j][i]`, i = 0..=3.
    pub c: [[f64; 4]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitePrices {
    pub call: f64,
    pub put: f64,
    pub future: f64,
    /// Call with all gammas set to zero.
    pub call0: f64,
}

/// ln g, and the four d^i_{mu_1} g (i = 0..=3) at `y`, free of cancellation.
fn g_derivs(f: &JForm, y: f64) -> [f64; 4] {
    let lg = f.ln_g(y);
    if f.ln_c == f64::NEG_INFINITY {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let l = f.ln_c + f.dsigma * y;
    [
        lg.exp(),
        f.sign * 0.5 * (l - lg).exp(),
        0.25 * (l + log_add_exp(2f64.ln(), l) - 3.0 * lg).exp(),
        f.sign * 0.125 * (l + log_add_exp(4.0 * lg, 3f64.ln()) - 5.0 * lg).exp(),
    ]
}

fn factorials(n: usize) -> Vec<f64> {
    let mut out = vec![1.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] * i as f64;
    }
    out
}

fn weights_with(f: &JForm, order: usize, rule: &QuadratureRule<f64>) -> [Vec<f64>; 4] {
    let fact = factorials(order);
    let mut w: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; order + 1]);
    let mut he = vec![0.0; order + 1];
    for (y, wq) in rule.iter() {
        let d = g_derivs(f, y);
        he[0] = 1.0;
        if order >= 1 {
            he[1] = y;
        }
        for m in 1..order {
            he[m + 1] = y * he[m] - m as f64 * he[m - 1];
        }
        for i in 0..4 {
            let di = wq * d[i];
            for n in 0..=order {
                w[i][n] += di * he[n];
            }
        }
    }
    for wi in w.iter_mut() {
        for (n, x) in wi.iter_mut().enumerate() {
            *x /= fact[n];
        }
    }
    w
}

impl HermiteBasis {
    pub fn new(p: &MixedProxyParams, order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(MixedError::OrderTooHigh {
                order,
                reason: format!("maximum supported order is {MAX_ORDER}"),
            });
        }
        let rule = gauss_hermite_prob::<f64>(NODES)?;
        let check = gauss_hermite_prob::<f64>(CHECK_NODES)?;
        let mut forms = [None, None];
        let mut weights = [None, None];
        for j in [Component::First, Component::Second] {
            if !p.is_active(j) {
                continue;
            }
            let f = p.jform(j)?;
            let w = weights_with(&f, order, &rule);
            let w2 = weights_with(&f, order, &check);
            for i in 0..4 {
                let diff = (w[i][order] - w2[i][order]).abs();
                if diff > 1e-6 * w2[i][order].abs().max(1.0) {
                    return Err(MixedError::OrderTooHigh {
                        order,
                        reason: format!("weight quadrature unstable (change {diff:.2e} under node doubling)"),
                    });
                }
            }
            forms[j.index()] = Some(f);
            weights[j.index()] = Some(w);
        }
        Ok(Self { order, forms, weights })
    }

    pub fn weights(&self, j: Component) -> Result<&[Vec<f64>; 4]> {
        self.weights[j.index()].as_ref().ok_or(MixedError::EmptyComponent(j.number()))
    }

    pub fn form(&self, j: Component) -> Result<&JForm> {
        self.forms[j.index()].as_ref().ok_or(MixedError::EmptyComponent(j.number()))
    }

    pub fn with_strike(&self, inp: &MixedInputs, k: f64) -> Result<HermiteLayer> {
        Ok(HermiteLayer {
            basis: self.clone(),
            k,
            root: inp.params.root(k)?,
            c: c_coeffs(&inp.gammas, &inp.params)?,
        })
    }
}

/// Build the order-`order` Hermite layer at log-strike `k`.
pub fn hermite_weights(inp: &MixedInputs, k: f64, order: usize) -> Result<HermiteLayer> {
    HermiteBasis::new(&inp.params, order)?.with_strike(inp, k)
}

/// Gaussian-weighted MSE of the order-0..=n_max truncations of g_j.
pub fn order_mse(p: &MixedProxyParams, j: Component, n_max: usize) -> Result<Vec<f64>> {
    let basis = HermiteBasis::new(p, n_max)?;
    let f = basis.form(j)?;
    let w = &basis.weights(j)?[0];
    let rule = gauss_hermite_prob::<f64>(NODES)?;
    let mut mse = vec![0.0; n_max + 1];
    let mut he = vec![0.0; n_max + 1];
    for (y, wq) in rule.iter() {
        let g = f.ln_g(y).exp();
        he[0] = 1.0;
        if n_max >= 1 {
            he[1] = y;
        }
        for m in 1..n_max {
            he[m + 1] = y * he[m] - m as f64 * he[m - 1];
        }
        let mut s = 0.0;
        for n in 0..=n_max {
            s += w[n] * he[n];
            let r = s - g;
            mse[n] += wq * r * r;
        }
    }
    Ok(mse)
}

/// Smallest order in 1..=n_max whose truncation MSE is within 1e-6 of the best.
pub fn optimal_order(p: &MixedProxyParams, j: Component, n_max: usize) -> Result<usize> {
    let n_max = n_max.max(1);
    let mse = order_mse(p, j, n_max)?;
    let best = mse[1..].iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((1..=n_max).find(|&n| mse[n] <= best + 1e-6).unwrap_or(n_max))
}

/// The coefficients c_{i,j}, returned as `c[j][i]`.
pub fn c_coeffs(g: &[GammaCoefficients<f64>; 2], p: &MixedProxyParams) -> Result<[[f64; 4]; 2]> {
    for (i, s) in p.sigma.iter().enumerate() {
        if !(*s > 0.0) {
            return Err(MixedError::DegenerateComponent { j: i + 1, sigma: *s });
        }
    }
    let r = p.sigma[1] / p.sigma[0];
    let s = p.sigma[0] / p.sigma[1];
    let [g11, g21, g31] = g[0].as_array();
    let [g12, g22, g32] = g[1].as_array();
    let c01 = 1.0 + g11 / 2.0 + g21 / 4.0 + g31 / 8.0;
    let c02 = 1.0 + g12 / 2.0 + g22 / 4.0 + g32 / 8.0;
    let c11 = g11 + (1.0 - r / 2.0) * g21 + (0.75 - r / 2.0) * g31
        - (g12 + (s / 2.0) * g22 + (s / 2.0).powi(2) * g32);
    let c12 = (g11 + (r / 2.0) * g21 + (r / 2.0).powi(2) * g31) - g12 - (1.0 - s / 2.0) * g22 - (0.75 - s / 2.0) * g32;
    let c21 = (1.0 - r) * (g21 + g31) + 0.5 * (1.0 - r).powi(2) * g31 + (1.0 - s) * (g22 + s * g32);
    let c22 = (1.0 - r) * (g21 + r * g31) + (1.0 - s) * (g22 + g32) + 0.5 * (1.0 - s).powi(2) * g32;
    let c3 = (1.0 - r).powi(2) * g31 - (1.0 - s).powi(2) * g32;
    Ok([[c01, c11, c21, c3], [c02, c12, c22, c3]])
}

impl HermiteLayer {
    pub fn order(&self) -> usize {
        self.basis.order
    }

    /// I^j_{i,N}(a) for i = 0..=3, with a = A - sigma_j/2.
    pub fn tail_integrals(&self, p: &MixedProxyParams, j: Component) -> Result<[f64; 4]> {
        let w = self.basis.weights(j)?;
        let a = self.root - p.sigma[j.index()] / 2.0;
        let n = self.order();
        let pdf = norm_pdf(a);
        let sf = norm_cdf(-a);
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = w[i][0] * sf;
        }
        let (mut prev, mut cur) = (0.0, 1.0);
        for m in 1..=n {
            for i in 0..4 {
                out[i] += w[i][m] * cur * pdf;
            }
            let next = a * cur - (m - 1) as f64 * prev;
            prev = cur;
            cur = next;
        }
        Ok(out)
    }

    /// sum_{n>=1} sum_i c_{i,j} d^i omega_{n,j} He_{n-1}(a).
    pub(crate) fn correction_sum(&self, p: &MixedProxyParams, j: Component) -> Result<f64> {
        let w = self.basis.weights(j)?;
        let c = &self.c[j.index()];
        let a = self.root - p.sigma[j.index()] / 2.0;
        let (mut prev, mut cur) = (0.0, 1.0);
        let mut acc = 0.0;
        for n in 1..=self.order() {
            for i in 0..4 {
                acc += c[i] * w[i][n] * cur;
            }
            let next = a * cur - (n - 1) as f64 * prev;
            prev = cur;
            cur = next;
        }
        Ok(acc)
    }
}

/// Order-N Hermite call, put and futures prices from the component-`j` form.
pub fn hermite_prices(layer: &HermiteLayer, p: &MixedProxyParams, j: Component) -> Result<HermitePrices> {
    let w = layer.basis.weights(j)?;
    let f = layer.basis.form(j)?;
    let pre = f.ln_pre.exp();
    let c = &layer.c[j.index()];
    let tails = layer.tail_integrals(p, j)?;
    let mut head = 0.0;
    let mut full = 0.0;
    for i in 0..4 {
        head += c[i] * tails[i];
        full += c[i] * w[i][0];
    }
    let ek = layer.k.exp();
    let a = layer.root;
    Ok(HermitePrices {
        call: pre * head - ek * norm_cdf(-a),
        put: ek * norm_cdf(a) - pre * (full - head),
        future: pre * full,
        call0: pre * tails[0] - ek * norm_cdf(-a),
    })
}
