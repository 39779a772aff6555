use vix_mathcore::{expand_bracket, find_root, log_add_exp};
use vix_model::{MixedModel, VixContract};
use vix_single::{kernel_proxy, GammaCoefficients, ProxyParams, QuadSpec};

use crate::{MixedError, Result};

/// Mixture component, `First` carries weight lambda.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    First,
    Second,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::First => 0,
            Component::Second => 1,
        }
    }

    /// 1 or 2.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn other(self) -> Self {
        match self {
            Component::First => Component::Second,
            Component::Second => Component::First,
        }
    }

    /// (-1)^j.
    pub fn sign(self) -> f64 {
        match self {
            Component::First => -1.0,
            Component::Second => 1.0,
        }
    }

    pub fn from_number(j: usize) -> Option<Self> {
        match j {
            1 => Some(Component::First),
            2 => Some(Component::Second),
            _ => None,
        }
    }
}

/// Per-component log-normal proxies of the mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedProxyParams {
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    /// mu_j/2 + sigma_j^2/8.
    pub x: [f64; 2],
    /// ln E[VIX_T^2], shared by both components.
    pub log_mean: f64,
    pub lambda: [f64; 2],
    pub t: f64,
}

/// Proxy parameters together with each kernel's gamma coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedInputs {
    pub params: MixedProxyParams,
    pub gammas: [GammaCoefficients<f64>; 2],
}

/// Component-`j` factorisation `sqrt(h(y + sigma_j/2)) = pre_j * g_j(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JForm {
    pub j: Component,
    /// (-1)^j.
    pub sign: f64,
    /// (-1)^j (sigma_1 - sigma_2).
    pub dsigma: f64,
    /// ln C_j; minus infinity when the other component has no weight.
    pub ln_c: f64,
    /// ln(sqrt(lambda_j) e^{x_j}).
    pub ln_pre: f64,
}

impl JForm {
    /// ln g_j(y) with g_j(y) = sqrt(1 + C_j e^{dsigma y}).
    #[inline]
    pub fn ln_g(&self, y: f64) -> f64 {
        if self.ln_c == f64::NEG_INFINITY {
            return 0.0;
        }
        0.5 * log_add_exp(0.0, self.ln_c + self.dsigma * y)
    }
}

impl MixedProxyParams {
    pub fn new(mu: [f64; 2], sigma: [f64; 2], lambda: [f64; 2], log_mean: f64, t: f64) -> Self {
        let x = [mu[0] / 2.0 + sigma[0] * sigma[0] / 8.0, mu[1] / 2.0 + sigma[1] * sigma[1] / 8.0];
        Self {
            mu,
            sigma,
            x,
            log_mean,
            lambda,
            t,
        }
    }

    pub fn component(&self, j: Component) -> ProxyParams<f64> {
        let i = j.index();
        ProxyParams::new(self.mu[i], self.sigma[i], self.t)
    }

    pub fn sigma_tilde(&self, j: Component) -> f64 {
        self.sigma[j.index()] / self.t.sqrt()
    }

    pub fn is_active(&self, j: Component) -> bool {
        self.lambda[j.index()] > 0.0
    }

    /// Component with the smaller sigma_P among those with positive weight.
    pub fn default_component(&self) -> Component {
        let (a, b) = (Component::First, Component::Second);
        match (self.is_active(a), self.is_active(b)) {
            (true, false) => a,
            (false, true) => b,
            _ if self.sigma[1] < self.sigma[0] => b,
            _ => a,
        }
    }

    /// Same proxies with the means shifted by `(d1, d2)`.
    pub fn shifted(&self, d1: f64, d2: f64) -> Self {
        Self::new(
            [self.mu[0] + d1, self.mu[1] + d2],
            self.sigma,
            self.lambda,
            self.log_mean,
            self.t,
        )
    }

    /// ln h(z).
    pub fn ln_h(&self, z: f64) -> f64 {
        let mut acc = f64::NEG_INFINITY;
        for i in 0..2 {
            if self.lambda[i] > 0.0 {
                acc = log_add_exp(acc, self.lambda[i].ln() + self.mu[i] + self.sigma[i] * z);
            }
        }
        acc
    }

    /// d/dz ln h(z), the h-weighted average of the sigmas.
    fn dln_h(&self, z: f64) -> f64 {
        let l = self.ln_h(z);
        let mut acc = 0.0;
        for i in 0..2 {
            if self.lambda[i] > 0.0 {
                acc += self.sigma[i] * (self.lambda[i].ln() + self.mu[i] + self.sigma[i] * z - l).exp();
            }
        }
        acc
    }

    /// Root A of h(A) = e^{2k}.
    pub fn root(&self, k: f64) -> Result<f64> {
        let active: Vec<usize> = (0..2).filter(|&i| self.lambda[i] > 0.0).collect();
        if active.iter().all(|&i| self.sigma[i] <= 0.0) {
            return Err(MixedError::ConstantH);
        }
        let f = |z: f64| self.ln_h(z) - 2.0 * k;
        // Each active term alone brackets the root from one side.
        let guesses: Vec<f64> = active
            .iter()
            .filter(|&&i| self.sigma[i] > 0.0)
            .map(|&i| (2.0 * k - self.mu[i] - self.lambda[i].ln()) / self.sigma[i])
            .collect();
        let c = guesses.iter().sum::<f64>() / guesses.len() as f64;
        let (lo, hi) = expand_bracket(f, c - 1.0, c + 1.0, 200)?;
        let mut a = find_root(f, lo, hi, 1e-15)?;
        for _ in 0..3 {
            let d = self.dln_h(a);
            if d <= 0.0 {
                break;
            }
            let step = f(a) / d;
            if !step.is_finite() || step.abs() > 1e-6 * (1.0 + a.abs()) {
                break;
            }
            a -= step;
        }
        Ok(a)
    }

    pub fn jform(&self, j: Component) -> Result<JForm> {
        let i = j.index();
        if !self.is_active(j) {
            return Err(MixedError::EmptyComponent(j.number()));
        }
        let sign = j.sign();
        let dsigma = sign * (self.sigma[0] - self.sigma[1]);
        let other = 1 - i;
        let ln_c = if self.lambda[other] > 0.0 {
            sign * (self.lambda[0].ln() - self.lambda[1].ln())
                + sign * (self.mu[0] - self.mu[1])
                + self.sigma[i] * dsigma / 2.0
        } else {
            f64::NEG_INFINITY
        };
        Ok(JForm {
            j,
            sign,
            dsigma,
            ln_c,
            ln_pre: 0.5 * self.lambda[i].ln() + self.x[i],
        })
    }
}

/// Proxy parameters and gammas of both components.
pub fn mixed_proxy(m: &MixedModel<f64>, c: &VixContract<f64>, q: QuadSpec) -> Result<MixedInputs> {
    let k1 = kernel_proxy(&m.kernels[0], &m.curve, c, q)?;
    let k2 = kernel_proxy(&m.kernels[1], &m.curve, c, q)?;
    let p1 = k1.proxy(c.t);
    let p2 = k2.proxy(c.t);
    Ok(MixedInputs {
        params: MixedProxyParams::new(
            [p1.mu_p, p2.mu_p],
            [p1.sigma_p, p2.sigma_p],
            m.weights(),
            k1.log_mean,
            c.t,
        ),
        gammas: [k1.gammas, k2.gammas],
    })
}

pub fn mixed_proxy_params(m: &MixedModel<f64>, c: &VixContract<f64>, q: QuadSpec) -> Result<MixedProxyParams> {
    Ok(mixed_proxy(m, c, q)?.params)
}

/// The map h and the root A = h^{-1}(e^{2k}).
pub fn h_and_root(p: &MixedProxyParams, k: f64) -> Result<(impl Fn(f64) -> f64 + '_, f64)> {
    let a = p.root(k)?;
    Ok((move |z: f64| p.ln_h(z).exp(), a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_single_component() {
        let p = MixedProxyParams::new([-3.0, -2.0], [0.5, 0.2], [1.0, 0.0], -2.9, 0.1);
        let k = 0.2f64.ln();
        let a = p.root(k).unwrap();
        assert!((a - (2.0 * k + 3.0) / 0.5).abs() < 1e-12);
        let (h, a) = h_and_root(&p, k).unwrap();
        assert!((h(a) - (2.0 * k).exp()).abs() < 1e-14);
    }

    #[test]
    fn constant_h() {
        let p = MixedProxyParams::new([-3.0, -2.0], [0.0, 0.0], [0.5, 0.5], -2.9, 0.1);
        assert_eq!(p.root(0.0), Err(MixedError::ConstantH));
    }

    #[test]
    fn jform_factorises_h() {
        let p = MixedProxyParams::new([-3.1, -2.9], [1.2, 0.3], [0.3, 0.7], -2.9, 0.1);
        for j in [Component::First, Component::Second] {
            let f = p.jform(j).unwrap();
            let s = p.sigma[j.index()];
            for y in [-2.0, 0.0, 1.5] {
                let z = y + s / 2.0;
                let lhs = 0.5 * p.ln_h(z);
                let rhs = f.ln_pre + f.ln_g(y) + s * y / 2.0 + s * s / 8.0;
                assert!((lhs - rhs).abs() < 1e-13, "{j:?} {y}");
            }
        }
    }
}
