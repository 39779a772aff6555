use crate::{ModelError, Result};
use vix_mathcore::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Exponential,
    PowerLaw,
}

/// Loading K^u(t) of the Brownian shock at t on the forward variance at u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec<T> {
    /// omega * exp(-kappa (u - t)), standard Bergomi.
    Exponential { omega: T, kappa: T },
    /// eta * (u - t)^(H - 1/2), rough Bergomi.
    PowerLaw { eta: T, hurst: T },
}

impl<T: Scalar> KernelSpec<T> {
    pub fn exponential(omega: T, kappa: T) -> Result<Self> {
        let k = Self::Exponential { omega, kappa };
        k.validate()?;
        Ok(k)
    }

    pub fn power_law(eta: T, hurst: T) -> Result<Self> {
        let k = Self::PowerLaw { eta, hurst };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { omega, kappa } => {
                if !(omega > T::zero() && omega.is_finite()) {
                    return Err(ModelError::InvalidParameter(format!("omega={omega} must be > 0")));
                }
                if !(kappa > T::zero() && kappa.is_finite()) {
                    return Err(ModelError::InvalidParameter(format!("kappa={kappa} must be > 0")));
                }
            }
            Self::PowerLaw { eta, hurst } => {
                if !(eta > T::zero() && eta.is_finite()) {
                    return Err(ModelError::InvalidParameter(format!("eta={eta} must be > 0")));
                }
                if !(hurst > T::zero() && hurst < T::lit(0.5)) {
                    return Err(ModelError::InvalidParameter(format!("hurst={hurst} must lie in (0, 1/2)")));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            Self::Exponential { .. } => KernelKind::Exponential,
            Self::PowerLaw { .. } => KernelKind::PowerLaw,
        }
    }

    /// Vol-of-variance: omega or eta.
    pub fn scale(&self) -> T {
        match *self {
            Self::Exponential { omega, .. } => omega,
            Self::PowerLaw { eta, .. } => eta,
        }
    }

    /// Decay parameter: kappa or H.
    pub fn decay(&self) -> T {
        match *self {
            Self::Exponential { kappa, .. } => kappa,
            Self::PowerLaw { hurst, .. } => hurst,
        }
    }

    pub fn with_scale(&self, s: T) -> Self {
        match *self {
            Self::Exponential { kappa, .. } => Self::Exponential { omega: s, kappa },
            Self::PowerLaw { hurst, .. } => Self::PowerLaw { eta: s, hurst },
        }
    }

    pub fn with_decay(&self, d: T) -> Self {
        match *self {
            Self::Exponential { omega, .. } => Self::Exponential { omega, kappa: d },
            Self::PowerLaw { eta, .. } => Self::PowerLaw { eta, hurst: d },
        }
    }

    pub fn same_family(&self, other: &Self) -> bool {
        self.kind() == other.kind() && self.decay() == other.decay()
    }

    /// Kernel value, for `t < u` only.
    pub fn eval(&self, u: T, t: T) -> Result<T> {
        if !(t < u) {
            return Err(ModelError::KernelDomain {
                u: u.as_f64(),
                t: t.as_f64(),
            });
        }
        Ok(self.eval_unchecked(u - t))
    }

    /// Kernel value at lag `r = u - t > 0`.
    #[inline]
    pub fn eval_unchecked(&self, r: T) -> T {
        match *self {
            Self::Exponential { omega, kappa } => omega * (-kappa * r).exp(),
            Self::PowerLaw { eta, hurst } => eta * r.powf(hurst - T::lit(0.5)),
        }
    }

    /// int_a^b K^u(t) du for t <= a <= b.
    pub fn u_integral(&self, t: T, a: T, b: T) -> T {
        self.u_integral_lags(a - t, b - t)
    }

    /// Same as [`Self::u_integral`] with lags `ra = a - t`, `rb = b - t` given directly.
    pub fn u_integral_lags(&self, ra: T, rb: T) -> T {
        match *self {
            Self::Exponential { omega, kappa } => omega * (-kappa * ra).exp() * (-(-kappa * (rb - ra)).exp_m1()) / kappa,
            Self::PowerLaw { eta, hurst } => {
                let p = hurst + T::lit(0.5);
                eta * (rb.powf(p) - ra.powf(p)) / p
            }
        }
    }

    /// int_a^b K^u(t)^2 du for t <= a <= b.
    pub fn u_integral_sq(&self, t: T, a: T, b: T) -> T {
        self.u_integral_sq_lags(a - t, b - t)
    }

    pub fn u_integral_sq_lags(&self, ra: T, rb: T) -> T {
        match *self {
            Self::Exponential { omega, kappa } => {
                let k2 = kappa + kappa;
                omega * omega * (-k2 * ra).exp() * (-(-k2 * (rb - ra)).exp_m1()) / k2
            }
            Self::PowerLaw { eta, hurst } => {
                let p = hurst + hurst;
                eta * eta * (rb.powf(p) - ra.powf(p)) / p
            }
        }
    }

    /// int_0^T K^u(t)^2 dt for u >= T.
    pub fn sq_time_integral(&self, u: T, t_end: T) -> T {
        self.sq_time_integral_lag(u - t_end, t_end)
    }

    /// int_0^T K^{T+d}(t)^2 dt with `d = u - T >= 0`.
    pub fn sq_time_integral_lag(&self, d: T, t_end: T) -> T {
        match *self {
            Self::Exponential { omega, kappa } => {
                let k2 = kappa + kappa;
                omega * omega * (-k2 * d).exp() * (-(-k2 * t_end).exp_m1()) / k2
            }
            Self::PowerLaw { eta, hurst } => {
                let p = hurst + hurst;
                eta * eta * ((t_end + d).powf(p) - d.powf(p)) / p
            }
        }
    }
}
