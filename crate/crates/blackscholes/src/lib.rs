//! Black-Scholes on log-forward `x` and log-strike `k`, undiscounted.
//!
//! Prices are in forward units: there are no rates or dividends, which matches
//! VIX futures-style options quoted against the futures level.

use thiserror::Error;
use vix_mathcore::{find_root, norm_cdf, norm_pdf, MathError, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BsError {
    #[error("degenerate volatility: sigma*sqrt(T) = {0}")]
    DegenerateVol(f64),
    #[error("unsupported derivative order {0} (supported: 1..=3)")]
    UnsupportedOrder(usize),
    #[error("price {price} violates the {bound} bound {limit}")]
    Arbitrage {
        price: f64,
        bound: &'static str,
        limit: f64,
    },
    #[error(transparent)]
    Math(#[from] MathError),
}

pub type Result<T> = std::result::Result<T, BsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsInputs<T> {
    /// Log-forward.
    pub x: T,
    /// Log-strike.
    pub k: T,
    pub sigma: T,
    /// Maturity in years.
    pub t: T,
}

pub type BsInputs64 = BsInputs<f64>;
pub type BsInputs32 = BsInputs<f32>;

impl<T: Scalar> BsInputs<T> {
    pub fn new(x: T, k: T, sigma: T, t: T) -> Self {
        Self { x, k, sigma, t }
    }

    /// Total standard deviation sigma*sqrt(T).
    #[inline]
    pub fn total_vol(&self) -> T {
        self.sigma * self.t.max(T::zero()).sqrt()
    }

    fn checked_total_vol(&self) -> Result<T> {
        let s = self.total_vol();
        if s > T::zero() && s.is_finite() {
            Ok(s)
        } else {
            Err(BsError::DegenerateVol(s.as_f64()))
        }
    }
}

pub fn d1_d2<T: Scalar>(inp: &BsInputs<T>) -> Result<(T, T)> {
    let s = inp.checked_total_vol()?;
    let d1 = (inp.x - inp.k) / s + s * T::lit(0.5);
    Ok((d1, d1 - s))
}

pub fn call_price<T: Scalar>(inp: &BsInputs<T>) -> T {
    match d1_d2(inp) {
        Ok((d1, d2)) => inp.x.exp() * norm_cdf(d1) - inp.k.exp() * norm_cdf(d2),
        Err(_) => (inp.x.exp() - inp.k.exp()).max(T::zero()),
    }
}

pub fn put_price<T: Scalar>(inp: &BsInputs<T>) -> T {
    match d1_d2(inp) {
        Ok((d1, d2)) => inp.k.exp() * norm_cdf(-d2) - inp.x.exp() * norm_cdf(-d1),
        Err(_) => (inp.k.exp() - inp.x.exp()).max(T::zero()),
    }
}

pub fn price<T: Scalar>(kind: OptionKind, inp: &BsInputs<T>) -> T {
    match kind {
        OptionKind::Call => call_price(inp),
        OptionKind::Put => put_price(inp),
    }
}

pub fn vega<T: Scalar>(inp: &BsInputs<T>) -> Result<T> {
    let (d1, _) = d1_d2(inp)?;
    Ok(inp.x.exp() * inp.t.sqrt() * norm_pdf(d1))
}

pub fn vomma<T: Scalar>(inp: &BsInputs<T>) -> Result<T> {
    let v = vega(inp)?;
    let m = inp.x - inp.k;
    let s = inp.sigma;
    Ok(v * (m * m / (s * s * s * inp.t) - s * inp.t * T::lit(0.25)))
}

// Gaussian part shared by calls and puts.
fn dx_gauss<T: Scalar>(i: usize, inp: &BsInputs<T>) -> Result<T> {
    let s = inp.checked_total_vol()?;
    let (d1, _) = d1_d2(inp)?;
    let pdf = inp.x.exp() * norm_pdf(d1);
    match i {
        1 => Ok(T::zero()),
        2 => Ok(pdf / s),
        3 => Ok(pdf * (T::lit(2.0) / s - d1 / (s * s))),
        _ => Err(BsError::UnsupportedOrder(i)),
    }
}

/// i-th derivative of the call price in `x`, i in 1..=3.
pub fn dx_call<T: Scalar>(i: usize, inp: &BsInputs<T>) -> Result<T> {
    let g = dx_gauss(i, inp)?;
    let (d1, _) = d1_d2(inp)?;
    Ok(inp.x.exp() * norm_cdf(d1) + g)
}

/// i-th derivative of the put price in `x`, i in 1..=3.
pub fn dx_put<T: Scalar>(i: usize, inp: &BsInputs<T>) -> Result<T> {
    let g = dx_gauss(i, inp)?;
    let (d1, _) = d1_d2(inp)?;
    Ok(-inp.x.exp() * norm_cdf(-d1) + g)
}

/// Derivative of the call price in the log-strike.
pub fn dk_call<T: Scalar>(inp: &BsInputs<T>) -> Result<T> {
    let (_, d2) = d1_d2(inp)?;
    Ok(-inp.k.exp() * norm_cdf(d2))
}

/// Black-Scholes implied volatility by bracketing.
///
/// The initial bracket is `[1e-8, 5]`, widened upward if the price needs it.
pub fn implied_vol<T: Scalar>(price_in: T, x: T, k: T, t: T, kind: OptionKind) -> Result<T> {
    let fx = x.exp();
    let fk = k.exp();
    let (lower, upper) = match kind {
        OptionKind::Call => ((fx - fk).max(T::zero()), fx),
        OptionKind::Put => ((fk - fx).max(T::zero()), fk),
    };
    if !(price_in > lower) {
        return Err(BsError::Arbitrage {
            price: price_in.as_f64(),
            bound: "lower (intrinsic)",
            limit: lower.as_f64(),
        });
    }
    if !(price_in < upper) {
        return Err(BsError::Arbitrage {
            price: price_in.as_f64(),
            bound: "upper",
            limit: upper.as_f64(),
        });
    }
    // Invert the out-of-the-money side, which is far better conditioned.
    let (kind, price_in) = match kind {
        OptionKind::Call if fx > fk => (OptionKind::Put, price_in - (fx - fk)),
        OptionKind::Put if fk > fx => (OptionKind::Call, price_in - (fk - fx)),
        _ => (kind, price_in),
    };
    let f = |s: T| price(kind, &BsInputs::new(x, k, s, t)) - price_in;
    let lo = T::lit(1e-8);
    let mut hi = T::lit(5.0);
    let mut n = 0;
    while f(hi) < T::zero() && n < 20 {
        hi = hi * T::lit(2.0);
        n += 1;
    }
    let tol = T::lit(1e-15).max(T::epsilon() * price_in);
    let mut s = find_root(f, lo, hi, tol)?;
    // Newton polish where vega is not negligible.
    for _ in 0..2 {
        let inp = BsInputs::new(x, k, s, t);
        let v = match vega(&inp) {
            Ok(v) => v,
            Err(_) => break,
        };
        if v <= T::lit(1e-10) * fx {
            break;
        }
        let step = (price(kind, &inp) - price_in) / v;
        let next = s - step;
        if !(next > T::zero()) || step.abs() > s * T::lit(0.1) {
            break;
        }
        s = next;
    }
    Ok(s)
}
