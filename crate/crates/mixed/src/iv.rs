use vix_blackscholes::{vega, BsInputs};
use vix_mathcore::{find_root, norm_pdf};
use vix_model::{MixedModel, SingleModel, VixContract};
use vix_single::{iv_expansion, kernel_proxy, QuadSpec};

use crate::hermite::HermiteLayer;
use crate::proxy::{Component, MixedProxyParams};
use crate::{MixedError, Result};

/// Auxiliary log-spot/log-strike pair pinning d_2 to -A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaChoice {
    pub theta: f64,
    pub j: Component,
    pub x_theta: f64,
    pub k_theta: f64,
    /// k - ln F - A sigma_j/2 + sigma_j^2/8.
    pub delta: f64,
    pub log_future: f64,
    pub k: f64,
}

impl ThetaChoice {
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            x_theta: self.log_future + theta * self.delta,
            k_theta: self.k - (1.0 - theta) * self.delta,
            ..*self
        }
    }
}

/// theta* and the coordinates (x_theta, k_theta) for component `j`.
///
/// theta* = 1 when delta_j > 0 and 0 otherwise, which maximises x_theta.
pub fn theta_and_coords(layer: &HermiteLayer, p: &MixedProxyParams, j: Component, future: f64) -> ThetaChoice {
    let s = p.sigma[j.index()];
    let lnf = future.ln();
    let delta = layer.k - lnf - layer.root * s / 2.0 + s * s / 8.0;
    let theta = if delta > 0.0 { 1.0 } else { 0.0 };
    ThetaChoice {
        theta,
        j,
        x_theta: lnf + theta * delta,
        k_theta: layer.k - (1.0 - theta) * delta,
        delta,
        log_future: lnf,
        k: layer.k,
    }
}

/// Hermite implied-volatility expansion for component `j`.
pub fn iv_expansion_mixed(layer: &HermiteLayer, p: &MixedProxyParams, theta: &ThetaChoice) -> Result<f64> {
    let j = theta.j;
    let st = p.sigma_tilde(j);
    if !(st > 0.0) {
        return Err(MixedError::DegenerateComponent {
            j: j.number(),
            sigma: p.sigma[j.index()],
        });
    }
    let pre = layer.basis.form(j)?.ln_pre;
    let sum = layer.correction_sum(p, j)?;
    Ok(st / 2.0 + (pre - theta.x_theta).exp() / p.t.sqrt() * sum)
}

/// Extended expansion: the Hermite correction divided by the Black-Scholes vega at (ln F, k).
pub fn iv_expansion_extended(layer: &HermiteLayer, p: &MixedProxyParams, j: Component, future: f64) -> Result<f64> {
    let st = p.sigma_tilde(j);
    let v = vega(&BsInputs::new(future.ln(), layer.k, st / 2.0, p.t))?;
    if !(v > 1e-12) {
        return Err(MixedError::VanishingVega(v));
    }
    let pre = layer.basis.form(j)?.ln_pre.exp();
    let a = layer.root - p.sigma[j.index()] / 2.0;
    let sum = layer.correction_sum(p, j)?;
    Ok(st / 2.0 + pre * sum * norm_pdf(a) / v)
}

/// Single-kernel log-normal matched to the first two moments of the mixture proxy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMatch {
    pub m1: f64,
    pub m2: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    /// Matched kappa (exponential) or H (power law).
    pub decay: f64,
    /// Matched omega or eta.
    pub scale: f64,
    pub iv: f64,
}

/// Moment-matched single-kernel implied volatility.
pub fn moment_matched_iv(m: &MixedModel<f64>, c: &VixContract<f64>, q: QuadSpec) -> Result<MomentMatch> {
    let comps: Vec<_> = (0..2).map(|i| kernel_proxy(&m.kernels[i], &m.curve, c, q)).collect::<std::result::Result<_, _>>()?;
    let p: Vec<_> = comps.iter().map(|k| k.proxy(c.t)).collect();
    let l = m.weights();
    let (mu, s) = ([p[0].mu_p, p[1].mu_p], [p[0].sigma_p, p[1].sigma_p]);
    let m1 = l[0] * (mu[0] + s[0] * s[0] / 2.0).exp() + l[1] * (mu[1] + s[1] * s[1] / 2.0).exp();
    let m2 = l[0] * l[0] * (2.0 * mu[0] + 2.0 * s[0] * s[0]).exp()
        + l[1] * l[1] * (2.0 * mu[1] + 2.0 * s[1] * s[1]).exp()
        + 2.0 * l[0] * l[1] * (mu[0] + mu[1] + (s[0] + s[1]).powi(2) / 2.0).exp();
    if !(m2 > m1 * m1) {
        return Err(MixedError::MatchingInfeasible(format!("m2={m2} <= m1^2={}", m1 * m1)));
    }
    let sigma_y = (m2 / (m1 * m1)).ln().sqrt();
    let mu_y = m1.ln() - sigma_y * sigma_y / 2.0;
    let log_mean = comps[0].log_mean;

    let base = m.kernels[0];
    let (lo, hi) = match base.kind() {
        vix_model::KernelKind::Exponential => (1e-4, 50.0),
        vix_model::KernelKind::PowerLaw => (1e-3, 0.499),
    };
    let unit = |dec: f64| -> Result<(f64, f64)> {
        let k = base.with_scale(1.0).with_decay(dec);
        let ki = kernel_proxy(&k, &m.curve, c, q)?;
        Ok((ki.m, ki.q))
    };
    let ratio = |dec: f64| -> f64 {
        match unit(dec) {
            Ok((m0, q0)) => 2.0 * (log_mean - mu_y) / m0 - sigma_y * sigma_y / q0,
            Err(_) => f64::NAN,
        }
    };
    let (flo, fhi) = (ratio(lo), ratio(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(MixedError::MatchingInfeasible(format!(
            "ratio equation not bracketed on [{lo}, {hi}]: f = ({flo:.3e}, {fhi:.3e})"
        )));
    }
    let decay = find_root(ratio, lo, hi, 1e-14)?;
    let (_, q0) = unit(decay)?;
    let scale = (sigma_y * sigma_y / q0).sqrt();
    let single = SingleModel::new(base.with_scale(scale).with_decay(decay), m.curve.clone())?;
    let ki = kernel_proxy(&single.kernel, &single.curve, c, q)?;
    let iv = iv_expansion(&ki.proxy(c.t), &ki.gammas, c)?;
    Ok(MomentMatch {
        m1,
        m2,
        mu_y,
        sigma_y,
        decay,
        scale,
        iv,
    })
}
