use vix_mathcore::Scalar;
use vix_model::{mean_vix2, weight_pieces, ForwardVarianceCurve, KernelSpec, SingleModel, VixContract};

use crate::grid::{time_lags, window_offsets};
use crate::{QuadSpec, Result};

/// Parameters of the log-normal proxy ln VIX^2_{T,P} ~ N(mu_P, sigma_P^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyParams<T> {
    pub mu_p: T,
    pub sigma_p: T,
    /// mu_P/2 + sigma_P^2/8, the log of E[VIX_{T,P}].
    pub x_p: T,
    /// sigma_P / sqrt(T).
    pub sigma_tilde: T,
    pub t: T,
}

impl<T: Scalar> ProxyParams<T> {
    pub fn new(mu_p: T, sigma_p: T, t: T) -> Self {
        Self {
            mu_p,
            sigma_p,
            x_p: mu_p * T::lit(0.5) + sigma_p * sigma_p * T::lit(0.125),
            sigma_tilde: sigma_p / t.sqrt(),
            t,
        }
    }

    /// Checks the stored derived fields against (mu_p, sigma_p, t).
    pub fn is_consistent(&self, tol: T) -> bool {
        let r = Self::new(self.mu_p, self.sigma_p, self.t);
        (r.x_p - self.x_p).abs() <= tol * T::one().max(self.x_p.abs())
            && (r.sigma_tilde - self.sigma_tilde).abs() <= tol * T::one().max(self.sigma_tilde)
    }
}

/// Third-order correction coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCoefficients<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub gamma3: T,
    /// gamma1/2 + gamma2/4 + gamma3/8.
    pub delta_sum: T,
}

impl<T: Scalar> GammaCoefficients<T> {
    pub fn new(gamma1: T, gamma2: T, gamma3: T) -> Self {
        Self {
            gamma1,
            gamma2,
            gamma3,
            delta_sum: gamma1 * T::lit(0.5) + gamma2 * T::lit(0.25) + gamma3 * T::lit(0.125),
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }
}

/// Everything the proxy needs from one kernel on one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegrals<T> {
    /// ln E[VIX_T^2].
    pub log_mean: T,
    /// int_0^T <K^2> dt.
    pub m: T,
    /// int_0^T <K>^2 dt, i.e. sigma_P^2.
    pub q: T,
    pub gammas: GammaCoefficients<T>,
}

impl<T: Scalar> KernelIntegrals<T> {
    pub fn proxy(&self, t: T) -> ProxyParams<T> {
        ProxyParams::new(self.log_mean - T::lit(0.5) * self.m, self.q.max(T::zero()).sqrt(), t)
    }
}

/// Proxy moments and gammas of `kernel` over the VIX window of `c`.
///
/// Inner u-integrals of K and K^2 are closed form on each curve piece; the
/// t- and u-integrals left over use Gauss-Legendre.
pub fn kernel_proxy<T: Scalar>(
    kernel: &KernelSpec<T>,
    curve: &ForwardVarianceCurve<T>,
    c: &VixContract<T>,
    q: QuadSpec,
) -> Result<KernelIntegrals<T>> {
    c.validate()?;
    kernel.validate()?;
    let log_mean = mean_vix2(curve, c)?.ln();
    let pieces = weight_pieces(curve, c)?;
    let tm = c.t;
    let (r, wt) = time_lags(kernel.kind(), tm, q.t_nodes)?;
    let (d, nu) = window_offsets(kernel.kind(), tm, c.delta, &pieces, q.u_nodes)?;

    let inv_delta = T::one() / c.delta;
    let mut kbar = Vec::with_capacity(r.len());
    let mut m = T::zero();
    let mut qq = T::zero();
    for (&ri, &wi) in r.iter().zip(&wt) {
        let mut k1 = T::zero();
        let mut k2 = T::zero();
        for p in &pieces {
            let ra = p.a - tm + ri;
            let rb = p.b - tm + ri;
            k1 = k1 + p.weight * kernel.u_integral_lags(ra, rb);
            k2 = k2 + p.weight * kernel.u_integral_sq_lags(ra, rb);
        }
        k1 = k1 * inv_delta;
        k2 = k2 * inv_delta;
        m = m + wi * k2;
        qq = qq + wi * k1 * k1;
        kbar.push(k1);
    }

    // Exponential kernels factor as K(d + r) = K(d) e^{-kappa r}, so B is a
    // single weighted sum scaled per u-node.
    let separable = match *kernel {
        KernelSpec::Exponential { kappa, .. } => Some(
            r.iter()
                .zip(&wt)
                .zip(&kbar)
                .fold(T::zero(), |s, ((&ri, &wi), &kb)| s + wi * (-kappa * ri).exp() * kb),
        ),
        KernelSpec::PowerLaw { .. } => None,
    };

    let half = T::lit(0.5);
    let mut s_aa = T::zero();
    let mut s_ac = T::zero();
    let mut s_cc = T::zero();
    let mut s_sq = T::zero();
    for (&dj, &nj) in d.iter().zip(&nu) {
        let a2 = kernel.sq_time_integral_lag(dj, tm);
        let b = match separable {
            Some(s) => kernel.eval_unchecked(dj) * s,
            None => r
                .iter()
                .zip(&wt)
                .zip(&kbar)
                .fold(T::zero(), |b, ((&ri, &wi), &kb)| b + wi * kernel.eval_unchecked(dj + ri) * kb),
        };
        let a = a2 - m;
        let cc = b - qq;
        s_aa = s_aa + nj * a * a;
        s_ac = s_ac + nj * a * cc;
        s_cc = s_cc + nj * cc * cc;
        s_sq = s_sq + nj * (a2 - b - b + qq);
    }
    let gammas = GammaCoefficients::new(s_aa * T::lit(0.125) + half * s_sq, -half * s_ac, half * s_cc);
    Ok(KernelIntegrals {
        log_mean,
        m,
        q: qq,
        gammas,
    })
}

pub fn proxy_params<T: Scalar>(m: &SingleModel<T>, c: &VixContract<T>, q: QuadSpec) -> Result<ProxyParams<T>> {
    Ok(kernel_proxy(&m.kernel, &m.curve, c, q)?.proxy(c.t))
}

pub fn gamma_coeffs<T: Scalar>(m: &SingleModel<T>, c: &VixContract<T>, q: QuadSpec) -> Result<GammaCoefficients<T>> {
    Ok(kernel_proxy(&m.kernel, &m.curve, c, q)?.gammas)
}

/// Closed-form proxy for an exponential kernel on a flat curve `xi`.
pub fn proxy_params_exponential_flat<T: Scalar>(omega: T, kappa: T, xi: T, c: &VixContract<T>) -> ProxyParams<T> {
    let kd = kappa * c.delta;
    let two = T::lit(2.0);
    let a1 = -(-kd).exp_m1() / kd;
    let a2 = -(-two * kd).exp_m1() / (two * kd);
    let v = -(-two * kappa * c.t).exp_m1() / (two * kappa);
    let s2 = omega * omega * a1 * a1 * v;
    let m = omega * omega * a2 * v;
    ProxyParams::new(xi.ln() - T::lit(0.5) * m, s2.sqrt(), c.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat() -> ForwardVarianceCurve<f64> {
        ForwardVarianceCurve::flat(0.0576).unwrap()
    }

    #[test]
    fn exponential_closed_form() {
        let c = VixContract::new(1.0 / 12.0, 0.0);
        let m = SingleModel::new(KernelSpec::exponential(2.0, 0.25).unwrap(), flat()).unwrap();
        let p = proxy_params(&m, &c, QuadSpec::default()).unwrap();
        let cf = proxy_params_exponential_flat(2.0, 0.25, 0.0576, &c);
        assert_relative_eq!(p.sigma_p, cf.sigma_p, max_relative = 1e-13);
        assert_relative_eq!(p.mu_p, cf.mu_p, max_relative = 1e-13);
        assert!((p.sigma_p - 0.5656).abs() < 1e-3);
        let p2 = proxy_params(&m, &c, QuadSpec { t_nodes: 240, u_nodes: 240 }).unwrap();
        assert_relative_eq!(p.sigma_p, p2.sigma_p, max_relative = 1e-13);
    }

    #[test]
    fn consistency_flag() {
        let p = ProxyParams::new(-3.0, 0.4, 0.25);
        assert!(p.is_consistent(1e-14));
        let mut bad = p;
        bad.x_p += 1e-6;
        assert!(!bad.is_consistent(1e-14));
    }
}
