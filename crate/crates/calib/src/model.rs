use serde::{Deserialize, Serialize};
use vix_mixed::{
    hermite_prices, iv_expansion_mixed, mixed_proxy, optimal_order, theta_and_coords, Component, HermiteBasis,
    MixedInputs, MAX_ORDER,
};
use vix_model::{ForwardVarianceCurve, KernelKind, KernelSpec, MixedModel, VixContract};
use vix_single::{iv_expansion, kernel_proxy, proxy_prices, GammaCoefficients, ProxyParams, QuadSpec};

use crate::{CalibError, Result};

/// Model family; the decay parameter (kappa or H) is fixed per calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Exponential kernel, parameter omega.
    Bergomi,
    /// Power-law kernel, parameter eta.
    Rbergomi,
    /// Two exponential kernels, (omega_1, omega_2, lambda).
    MixedBergomi,
    /// Two power-law kernels, (eta_1, eta_2, lambda).
    MixedRbergomi,
}

impl Family {
    pub fn is_mixed(self) -> bool {
        matches!(self, Family::MixedBergomi | Family::MixedRbergomi)
    }

    pub fn kind(self) -> KernelKind {
        match self {
            Family::Bergomi | Family::MixedBergomi => KernelKind::Exponential,
            Family::Rbergomi | Family::MixedRbergomi => KernelKind::PowerLaw,
        }
    }

    pub fn kernel(self, scale: f64, decay: f64) -> Result<KernelSpec<f64>> {
        Ok(match self.kind() {
            KernelKind::Exponential => KernelSpec::exponential(scale, decay)?,
            KernelKind::PowerLaw => KernelSpec::power_law(scale, decay)?,
        })
    }

    pub fn dim(self) -> usize {
        if self.is_mixed() {
            3
        } else {
            1
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bergomi" => Some(Family::Bergomi),
            "rbergomi" => Some(Family::Rbergomi),
            "mixed-bergomi" => Some(Family::MixedBergomi),
            "mixed-rbergomi" => Some(Family::MixedRbergomi),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Bergomi => "bergomi",
            Family::Rbergomi => "rbergomi",
            Family::MixedBergomi => "mixed-bergomi",
            Family::MixedRbergomi => "mixed-rbergomi",
        }
    }
}

/// Vol-of-variance parameters of one slice: omega/eta, plus lambda for mixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    Mixed { scale1: f64, scale2: f64, lambda: f64 },
    Single { scale: f64 },
}

impl Params {
    pub fn to_vec(self) -> Vec<f64> {
        match self {
            Params::Single { scale } => vec![scale],
            Params::Mixed { scale1, scale2, lambda } => vec![scale1, scale2, lambda],
        }
    }

    pub fn from_slice(family: Family, v: &[f64]) -> Result<Self> {
        match (family.is_mixed(), v) {
            (false, [s]) => Ok(Params::Single { scale: *s }),
            (true, [a, b, l]) => Ok(Params::Mixed {
                scale1: *a,
                scale2: *b,
                lambda: *l,
            }),
            _ => Err(CalibError::Config(format!(
                "{} expects {} parameters, got {}",
                family.name(),
                family.dim(),
                v.len()
            ))),
        }
    }

    pub fn matches(&self, family: Family) -> bool {
        matches!(self, Params::Mixed { .. }) == family.is_mixed()
    }
}

/// Parameter box for the optimiser and the futures fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub scale: (f64, f64),
    pub lambda: (f64, f64),
    pub xi0: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            scale: (1e-3, 20.0),
            lambda: (0.01, 0.99),
            xi0: (1e-5, 1.0),
        }
    }
}

impl Bounds {
    pub fn boxes(&self, family: Family) -> (Vec<f64>, Vec<f64>) {
        if family.is_mixed() {
            (
                vec![self.scale.0, self.scale.0, self.lambda.0],
                vec![self.scale.1, self.scale.1, self.lambda.1],
            )
        } else {
            (vec![self.scale.0], vec![self.scale.1])
        }
    }
}

enum Inner {
    Single {
        proxy: ProxyParams<f64>,
        gammas: GammaCoefficients<f64>,
    },
    Mixed {
        inp: MixedInputs,
        basis: HermiteBasis,
        j: Component,
    },
}

/// One slice's model evaluated at unit forward variance.
///
/// On a window where the curve is flat at xi0, the proxy means shift by
/// ln xi0 and nothing else moves, so the futures price scales with sqrt(xi0)
/// and IV(k; xi0) = IV(k - ln(xi0)/2; 1).
pub struct SliceModel {
    contract: VixContract<f64>,
    inner: Inner,
    unit_future: f64,
    pub order: Option<usize>,
}

/// Hermite order policy for mixed families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    /// Smallest near-optimal order up to the given maximum.
    Optimal(usize),
    Fixed(usize),
}

impl Default for OrderPolicy {
    fn default() -> Self {
        OrderPolicy::Optimal(MAX_ORDER)
    }
}

impl SliceModel {
    pub fn new(
        family: Family,
        decay: f64,
        params: &Params,
        contract: VixContract<f64>,
        order: OrderPolicy,
        component: Option<Component>,
        q: QuadSpec,
    ) -> Result<Self> {
        let unit = ForwardVarianceCurve::flat(1.0)?;
        let c = contract.with_strike(0.0);
        match (*params, family.is_mixed()) {
            (Params::Single { scale }, false) => {
                let ki = kernel_proxy(&family.kernel(scale, decay)?, &unit, &c, q)?;
                let proxy = ki.proxy(c.t);
                let f = proxy_prices(&proxy, &ki.gammas, &c)?.future;
                Ok(Self {
                    contract: c,
                    inner: Inner::Single {
                        proxy,
                        gammas: ki.gammas,
                    },
                    unit_future: f,
                    order: None,
                })
            }
            (Params::Mixed { scale1, scale2, lambda }, true) => {
                let m = MixedModel::new(
                    [family.kernel(scale1, decay)?, family.kernel(scale2, decay)?],
                    lambda,
                    unit,
                )?;
                let inp = mixed_proxy(&m, &c, q)?;
                let j = component.unwrap_or_else(|| inp.params.default_component());
                let n = match order {
                    OrderPolicy::Fixed(n) => n,
                    OrderPolicy::Optimal(n_max) => optimal_order_or_lower(&inp, j, n_max)?,
                };
                let basis = HermiteBasis::new(&inp.params, n)?;
                let layer = basis.with_strike(&inp, 0.0)?;
                let f = hermite_prices(&layer, &inp.params, j)?.future;
                Ok(Self {
                    contract: c,
                    inner: Inner::Mixed { inp, basis, j },
                    unit_future: f,
                    order: Some(n),
                })
            }
            _ => Err(CalibError::Config(format!("parameters do not match family {}", family.name()))),
        }
    }

    /// Model VIX futures price at flat forward variance `xi0`.
    pub fn future(&self, xi0: f64) -> f64 {
        xi0.sqrt() * self.unit_future
    }

    /// Expansion implied vol at log-strike `k` and forward variance `xi0`.
    pub fn iv(&self, k: f64, xi0: f64) -> Result<f64> {
        let k1 = k - 0.5 * xi0.ln();
        match &self.inner {
            Inner::Single { proxy, gammas } => Ok(iv_expansion(proxy, gammas, &self.contract.with_strike(k1))?),
            Inner::Mixed { inp, basis, j } => {
                let layer = basis.with_strike(inp, k1)?;
                let theta = theta_and_coords(&layer, &inp.params, *j, self.unit_future);
                Ok(iv_expansion_mixed(&layer, &inp.params, &theta)?)
            }
        }
    }

    /// xi0 reproducing `future`, within `bounds`.
    pub fn fit_xi0(&self, future: f64, bounds: (f64, f64)) -> Result<f64> {
        if !(future > 0.01 && future < 2.0) {
            return Err(CalibError::Data(format!(
                "futures level {future} outside (0.01, 2.0); quotes must be decimals"
            )));
        }
        let xi = (future / self.unit_future).powi(2);
        if !(xi >= bounds.0 && xi <= bounds.1) {
            return Err(CalibError::FuturesUnattainable {
                future,
                lo: self.future(bounds.0),
                hi: self.future(bounds.1),
            });
        }
        Ok(xi)
    }
}

fn optimal_order_or_lower(inp: &MixedInputs, j: Component, n_max: usize) -> Result<usize> {
    let mut n = n_max.clamp(1, MAX_ORDER);
    loop {
        match optimal_order(&inp.params, j, n) {
            Ok(v) => return Ok(v),
            Err(vix_mixed::MixedError::OrderTooHigh { .. }) if n > 1 => n -= 1,
            Err(e) => return Err(e.into()),
        }
    }
}
