use crate::{MathError, Result, Scalar};

/// Largest Hermite order accepted by [`hermite_poly`].
pub const HERMITE_MAX_ORDER: usize = 64;

/// Standard normal density.
#[inline]
pub fn norm_pdf<T: Scalar>(x: T) -> T {
    (-(x * x) * T::lit(0.5)).exp() * T::lit(0.398_942_280_401_432_7)
}

/// Standard normal CDF, via `erfc` so both tails keep full relative accuracy.
#[inline]
pub fn norm_cdf<T: Scalar>(x: T) -> T {
    T::lit(0.5) * (-x * T::FRAC_1_SQRT_2()).erfc()
}

/// Density and cumulative at `x`.
#[inline]
pub fn norm_pdf_cdf<T: Scalar>(x: T) -> (T, T) {
    (norm_pdf(x), norm_cdf(x))
}

/// Probabilists' Hermite polynomial He_n(x) by three-term recurrence.
pub fn hermite_poly<T: Scalar>(n: usize, x: T) -> Result<T> {
    if n > HERMITE_MAX_ORDER {
        return Err(MathError::UnsupportedOrder {
            order: n,
            max: HERMITE_MAX_ORDER,
        });
    }
    let mut prev = T::one();
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = x;
    for m in 1..n {
        let next = x * cur - T::lit(m as f64) * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// He_0(x), ..., He_nmax(x) in one pass.
pub fn hermite_polys<T: Scalar>(nmax: usize, x: T) -> Result<Vec<T>> {
    if nmax > HERMITE_MAX_ORDER {
        return Err(MathError::UnsupportedOrder {
            order: nmax,
            max: HERMITE_MAX_ORDER,
        });
    }
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(T::one());
    if nmax >= 1 {
        out.push(x);
    }
    for m in 1..nmax {
        let next = x * out[m] - T::lit(m as f64) * out[m - 1];
        out.push(next);
    }
    Ok(out)
}

/// ln(e^a + e^b) without overflow.
#[inline]
pub fn log_add_exp<T: Scalar>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite_poly(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite_poly(2, 2.0).unwrap(), 3.0);
        assert_eq!(hermite_poly(3, 2.0).unwrap(), 2.0);
        assert!(hermite_poly(65, 1.0f64).is_err());
    }

    #[test]
    fn hermite_batch_matches_single() {
        let v = hermite_polys(12, 0.7f64).unwrap();
        for (n, h) in v.iter().enumerate() {
            assert_relative_eq!(*h, hermite_poly(n, 0.7).unwrap(), max_relative = 1e-14);
        }
    }

    #[test]
    fn normal_values() {
        let (p, c) = norm_pdf_cdf(0.0f64);
        assert_relative_eq!(p, 0.398_942_280_401_432_7, epsilon = 1e-16);
        assert_eq!(c, 0.5);
        assert!((1.0 - norm_cdf(8.0f64)).abs() < 1e-15);
        assert!((norm_cdf(1.0f64) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((norm_cdf(-3.0f64) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
    }

    #[test]
    fn log_add_exp_extremes() {
        assert_relative_eq!(log_add_exp(800.0f64, 800.0), 800.0 + 2f64.ln());
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert_relative_eq!(log_add_exp(0.0f64, -1000.0), 0.0);
    }
}
