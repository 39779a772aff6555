use crate::{ModelError, Result};
use vix_mathcore::Scalar;

/// VIX averaging window, 30 calendar days.
pub const DEFAULT_DELTA: f64 = 30.0 / 365.0;

/// VIX option or futures contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VixContract<T> {
    /// Maturity in years.
    pub t: T,
    /// Window length in years.
    pub delta: T,
    /// Log-strike (ignored for futures).
    pub k: T,
}

impl<T: Scalar> VixContract<T> {
    pub fn new(t: T, k: T) -> Self {
        Self {
            t,
            delta: T::lit(DEFAULT_DELTA),
            k,
        }
    }

    pub fn with_delta(t: T, delta: T, k: T) -> Result<Self> {
        let c = Self { t, delta, k };
        c.validate()?;
        Ok(c)
    }

    pub fn with_strike(&self, k: T) -> Self {
        Self { k, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > T::zero()) || !(self.delta > T::zero()) {
            return Err(ModelError::InvalidParameter(format!(
                "contract needs T > 0 and delta > 0 (T={}, delta={})",
                self.t, self.delta
            )));
        }
        Ok(())
    }

    pub fn window_end(&self) -> T {
        self.t + self.delta
    }
}

/// Right-continuous piecewise-constant forward variance u -> xi_0^u.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardVarianceCurve<T> {
    segments: Vec<(T, T)>,
}

impl<T: Scalar> ForwardVarianceCurve<T> {
    pub fn flat(xi: T) -> Result<Self> {
        Self::new(vec![(T::zero(), xi)])
    }

    /// Segments as (start time, level), start times strictly increasing.
    pub fn new(segments: Vec<(T, T)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(ModelError::InvalidParameter("empty forward variance curve".into()));
        }
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::InvalidParameter("segment times must increase strictly".into()));
            }
        }
        for &(_, xi) in &segments {
            if !(xi >= T::lit(1e-6) && xi <= T::lit(10.0)) {
                return Err(ModelError::InvalidParameter(format!("level {xi} outside [1e-6, 10]")));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[(T, T)] {
        &self.segments
    }

    pub fn start(&self) -> T {
        self.segments[0].0
    }

    pub fn level(&self, u: T) -> Option<T> {
        if u < self.start() {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.0 <= u);
        Some(self.segments[idx - 1].1)
    }

    pub fn is_flat(&self) -> bool {
        self.segments.iter().all(|s| s.1 == self.segments[0].1)
    }

    /// Constant pieces (a, b, xi) covering [from, to].
    pub fn pieces(&self, from: T, to: T) -> Result<Vec<(T, T, T)>> {
        if from < self.start() {
            return Err(ModelError::CurveDomain {
                from: from.as_f64(),
                to: to.as_f64(),
            });
        }
        let mut out = Vec::new();
        for (i, &(s, xi)) in self.segments.iter().enumerate() {
            let e = self.segments.get(i + 1).map_or(T::infinity(), |n| n.0);
            let a = s.max(from);
            let b = e.min(to);
            if b > a {
                out.push((a, b, xi));
            }
        }
        Ok(out)
    }

    /// Same curve with every level multiplied by `c`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.segments.iter().map(|&(s, x)| (s, x * c)).collect())
    }
}

/// E[VIX_T^2] = (1/Delta) int_T^{T+Delta} xi_0^u du, exact on the pieces.
pub fn mean_vix2<T: Scalar>(curve: &ForwardVarianceCurve<T>, c: &VixContract<T>) -> Result<T> {
    let pieces = curve.pieces(c.t, c.window_end())?;
    Ok(pieces.iter().fold(T::zero(), |acc, &(a, b, xi)| acc + xi * (b - a)) / c.delta)
}

/// xi_0^u / E[VIX_T^2] for u in the window.
pub fn xi_weight<T: Scalar>(curve: &ForwardVarianceCurve<T>, c: &VixContract<T>, u: T) -> Result<T> {
    if u < c.t || u > c.window_end() {
        return Err(ModelError::WindowDomain {
            u: u.as_f64(),
            from: c.t.as_f64(),
            to: c.window_end().as_f64(),
        });
    }
    let m = mean_vix2(curve, c)?;
    let lvl = curve.level(u).ok_or(ModelError::CurveDomain {
        from: u.as_f64(),
        to: u.as_f64(),
    })?;
    Ok(lvl / m)
}

/// Piece of the VIX window with constant normalised weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPiece<T> {
    pub a: T,
    pub b: T,
    /// xi_0^u / E[VIX_T^2] on [a, b).
    pub weight: T,
}

pub fn weight_pieces<T: Scalar>(curve: &ForwardVarianceCurve<T>, c: &VixContract<T>) -> Result<Vec<WeightPiece<T>>> {
    let m = mean_vix2(curve, c)?;
    Ok(curve
        .pieces(c.t, c.window_end())?
        .into_iter()
        .map(|(a, b, xi)| WeightPiece { a, b, weight: xi / m })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c() -> VixContract<f64> {
        VixContract::new(0.25, 0.0)
    }

    #[test]
    fn flat_mean() {
        let cur = ForwardVarianceCurve::flat(0.0576).unwrap();
        assert_relative_eq!(mean_vix2(&cur, &c()).unwrap(), 0.0576, max_relative = 1e-15);
        assert_relative_eq!(xi_weight(&cur, &c(), 0.3).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn step_curve() {
        let cc = c();
        let mid = cc.t + cc.delta / 2.0;
        let cur = ForwardVarianceCurve::new(vec![(0.0, 0.04), (mid, 0.04)]).unwrap();
        assert_relative_eq!(mean_vix2(&cur, &cc).unwrap(), 0.04, max_relative = 1e-14);
        let cur = ForwardVarianceCurve::new(vec![(0.0, 0.04), (mid, 0.08)]).unwrap();
        assert_relative_eq!(mean_vix2(&cur, &cc).unwrap(), 0.06, max_relative = 1e-14);
        assert_relative_eq!(xi_weight(&cur, &cc, cc.t + 0.001).unwrap(), 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(xi_weight(&cur, &cc, mid + 0.001).unwrap(), 4.0 / 3.0, max_relative = 1e-14);
        let tot: f64 = weight_pieces(&cur, &cc).unwrap().iter().map(|p| p.weight * (p.b - p.a)).sum();
        assert_relative_eq!(tot / cc.delta, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn domain_errors() {
        let cur = ForwardVarianceCurve::new(vec![(0.5, 0.04)]).unwrap();
        assert!(matches!(mean_vix2(&cur, &c()), Err(ModelError::CurveDomain { .. })));
        let cur = ForwardVarianceCurve::flat(0.04).unwrap();
        assert!(matches!(xi_weight(&cur, &c(), 0.1), Err(ModelError::WindowDomain { .. })));
        assert!(ForwardVarianceCurve::new(vec![(0.0, 0.04), (0.0, 0.05)]).is_err());
        assert!(ForwardVarianceCurve::<f64>::flat(0.0).is_err());
    }
}
