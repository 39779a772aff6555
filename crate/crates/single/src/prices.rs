use vix_blackscholes::{call_price, dx_call, dx_put, put_price, BsInputs};
use vix_mathcore::Scalar;
use vix_model::VixContract;

use crate::{GammaCoefficients, ProxyParams, Result, SingleError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyPrices<T> {
    pub call: T,
    pub put: T,
    pub future: T,
    pub call0: T,
    pub put0: T,
    pub future0: T,
}

fn bs_inputs<T: Scalar>(p: &ProxyParams<T>, c: &VixContract<T>) -> Result<BsInputs<T>> {
    if !(p.sigma_p > T::zero()) {
        return Err(SingleError::Degenerate(p.sigma_p.as_f64()));
    }
    Ok(BsInputs::new(p.x_p, c.k, p.sigma_tilde * T::lit(0.5), c.t))
}

/// Proxy prices and their gamma-corrected versions.
pub fn proxy_prices<T: Scalar>(p: &ProxyParams<T>, g: &GammaCoefficients<T>, c: &VixContract<T>) -> Result<ProxyPrices<T>> {
    let inp = bs_inputs(p, c)?;
    let call0 = call_price(&inp);
    let put0 = put_price(&inp);
    let future0 = p.x_p.exp();
    let mut call = call0;
    let mut put = put0;
    let mut scale = T::one();
    for (i, gi) in g.as_array().into_iter().enumerate() {
        scale = scale * T::lit(0.5);
        call = call + scale * gi * dx_call(i + 1, &inp)?;
        put = put + scale * gi * dx_put(i + 1, &inp)?;
    }
    Ok(ProxyPrices {
        call,
        put,
        future: future0 * (T::one() + g.delta_sum),
        call0,
        put0,
        future0,
    })
}

/// Closed-form implied volatility, affine in the log-strike.
pub fn iv_expansion<T: Scalar>(p: &ProxyParams<T>, g: &GammaCoefficients<T>, c: &VixContract<T>) -> Result<T> {
    if !(p.sigma_tilde > T::zero()) {
        return Err(SingleError::Degenerate(p.sigma_p.as_f64()));
    }
    let s = p.sigma_tilde;
    let t = c.t;
    Ok(s * T::lit(0.5) + g.gamma2 / (T::lit(2.0) * s * t) + T::lit(3.0) * g.gamma3 / (T::lit(8.0) * s * t)
        - g.gamma3 * (p.x_p - c.k) / (s * s * s * t * t))
}
