use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use vix_blackscholes::{implied_vol, OptionKind};
use vix_mixed::{
    hermite_prices, iv_expansion_mixed, mixed_proxy, optimal_order, theta_and_coords, weak_approx_price, Component,
    HermiteBasis, MixedInputs, WeakOptions, MAX_ORDER,
};
use vix_model::{AnyModel, MixedModel, SingleModel, VixContract, DEFAULT_DELTA};
use vix_reference::{reference_smile, EngineChoice, McConfig, QuadNodes, SmileGrid, StrikeSpec};
use vix_single::{iv_expansion, kernel_proxy, proxy_prices, GammaCoefficients, ProxyParams, QuadSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Expansion,
    Hermite,
    WeakApprox,
    Reference,
}

pub const METHODS: &str = "expansion, hermite, weak-approx, reference";

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "expansion" => Ok(Method::Expansion),
            "hermite" => Ok(Method::Hermite),
            "weak-approx" => Ok(Method::WeakApprox),
            "reference" => Ok(Method::Reference),
            _ => Err(format!("unknown method '{s}' (expected one of: {METHODS})")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Expansion => "expansion",
            Method::Hermite => "hermite",
            Method::WeakApprox => "weak-approx",
            Method::Reference => "reference",
        })
    }
}

/// Smile request shared by every method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmileSpec {
    pub maturities: Vec<f64>,
    /// Offsets from the log of the anchor futures price.
    pub moneyness: Vec<f64>,
    /// Mixture component for the Hermite/expansion methods; `None` = smaller sigma_P.
    pub component: Option<usize>,
    /// Hermite order; `None` = optimal per maturity.
    pub order: Option<usize>,
    pub delta: f64,
    #[serde(skip)]
    pub mc: McConfig,
    #[serde(skip)]
    pub quad: QuadNodes,
}

impl Default for SmileSpec {
    fn default() -> Self {
        Self {
            maturities: vec![1.0 / 12.0, 0.25, 0.5],
            moneyness: (0..10).map(|i| -0.1 + 0.5 * i as f64 / 9.0).collect(),
            component: None,
            order: None,
            delta: DEFAULT_DELTA,
            mc: McConfig::default(),
            quad: QuadNodes::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmilePoint {
    pub k: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub log_moneyness: f64,
    /// Futures price implied by the method.
    pub future: f64,
    pub iv: f64,
    pub std_err: Option<f64>,
    pub flag: String,
}

enum Prepared {
    Single {
        proxy: ProxyParams<f64>,
        gammas: GammaCoefficients<f64>,
    },
    Mixed {
        inp: MixedInputs,
        j: Component,
    },
}

fn as_mixture(m: &AnyModel) -> Result<MixedModel<f64>, CliError> {
    match m {
        AnyModel::Mixed(mm) => Ok(mm.clone()),
        AnyModel::Single(s) => Ok(MixedModel::new([s.kernel, s.kernel], 1.0, s.curve.clone())?),
    }
}

fn component(spec: &SmileSpec, inp: &MixedInputs) -> Result<Component, CliError> {
    match spec.component {
        None => Ok(inp.params.default_component()),
        Some(n) => Component::from_number(n).ok_or_else(|| CliError::Usage(format!("component must be 1 or 2, got {n}"))),
    }
}

fn prepare(m: &AnyModel, c: &VixContract<f64>, spec: &SmileSpec, force_mixed: bool) -> Result<Prepared, CliError> {
    match m {
        AnyModel::Single(SingleModel { kernel, curve }) if !force_mixed => {
            let ki = kernel_proxy(kernel, curve, c, QuadSpec::default())?;
            Ok(Prepared::Single {
                proxy: ki.proxy(c.t),
                gammas: ki.gammas,
            })
        }
        _ => {
            let inp = mixed_proxy(&as_mixture(m)?, c, QuadSpec::default())?;
            let j = component(spec, &inp)?;
            Ok(Prepared::Mixed { inp, j })
        }
    }
}

/// Hermite order for a prepared mixture.
pub fn order_for(inp: &MixedInputs, j: Component, fixed: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = fixed {
        return Ok(n);
    }
    if !inp.params.is_active(j.other()) {
        return Ok(1);
    }
    let mut n_max = MAX_ORDER;
    loop {
        match optimal_order(&inp.params, j, n_max) {
            Ok(n) => return Ok(n),
            Err(vix_mixed::MixedError::OrderTooHigh { .. }) if n_max > 1 => n_max -= 1,
            Err(e) => return Err(e.into()),
        }
    }
}

/// Futures price defining the log-moneyness grid: the proxy futures price
/// (Hermite form for mixtures).
pub fn anchor_future(m: &AnyModel, t: f64, spec: &SmileSpec) -> Result<f64, CliError> {
    let c = VixContract::with_delta(t, spec.delta, 0.0)?;
    anchor_of(&prepare(m, &c, spec, false)?, &c)
}

fn anchor_of(prep: &Prepared, c: &VixContract<f64>) -> Result<f64, CliError> {
    match prep {
        Prepared::Single { proxy, gammas } => Ok(proxy_prices(proxy, gammas, c)?.future),
        Prepared::Mixed { inp, j } => {
            let layer = HermiteBasis::new(&inp.params, 1)?.with_strike(inp, 0.0)?;
            Ok(hermite_prices(&layer, &inp.params, *j)?.future)
        }
    }
}

fn invert(price: f64, future: f64, k: f64, t: f64, kind: OptionKind) -> (f64, String) {
    match implied_vol(price, future.ln(), k, t, kind) {
        Ok(v) => (v, String::new()),
        Err(e) => (f64::NAN, e.to_string()),
    }
}

fn otm(k: f64, future: f64) -> OptionKind {
    if k >= future.ln() {
        OptionKind::Call
    } else {
        OptionKind::Put
    }
}

fn point(k: f64, t: f64, x: f64, future: f64, r: Result<f64, CliError>) -> SmilePoint {
    let (iv, flag) = match r {
        Ok(v) if v.is_finite() => (v, String::new()),
        Ok(v) => (f64::NAN, format!("non-finite iv {v}")),
        Err(e) => (f64::NAN, e.to_string()),
    };
    SmilePoint {
        k,
        t,
        log_moneyness: x,
        future,
        iv,
        std_err: None,
        flag,
    }
}

/// Implied-vol smile of `m` by `method`, maturity-major.
///
/// Strikes sit at ln F_anchor + moneyness, with the anchor from
/// [`anchor_future`], so every method is evaluated at the same strikes.
/// Points where a method fails are kept with NaN and a flag.
pub fn smile(m: &AnyModel, method: Method, spec: &SmileSpec) -> Result<Vec<SmilePoint>, CliError> {
    let mut out = Vec::new();
    for &t in &spec.maturities {
        let c = VixContract::with_delta(t, spec.delta, 0.0)?;
        let prep = prepare(m, &c, spec, false)?;
        let anchor = anchor_of(&prep, &c)?;
        let strikes: Vec<f64> = spec.moneyness.iter().map(|x| anchor.ln() + x).collect();
        match method {
            Method::Reference => {
                let grid = SmileGrid {
                    maturities: vec![t],
                    strikes: StrikeSpec::LogStrike(strikes.clone()),
                    delta: spec.delta,
                };
                let rows = reference_smile(m, &grid, EngineChoice::Auto, spec.quad, &spec.mc)?;
                for (r, x) in rows.into_iter().zip(&spec.moneyness) {
                    out.push(SmilePoint {
                        k: r.k,
                        t,
                        log_moneyness: *x,
                        future: r.f_ref,
                        iv: r.iv_ref,
                        std_err: r.std_err,
                        flag: r.flag,
                    });
                }
            }
            Method::Expansion => match prep {
                Prepared::Single { proxy, gammas } => {
                    for (&k, &x) in strikes.iter().zip(&spec.moneyness) {
                        let iv = iv_expansion(&proxy, &gammas, &c.with_strike(k)).map_err(CliError::from);
                        out.push(point(k, t, x, anchor, iv));
                    }
                }
                Prepared::Mixed { inp, j } => {
                    let basis = HermiteBasis::new(&inp.params, order_for(&inp, j, spec.order)?)?;
                    for (&k, &x) in strikes.iter().zip(&spec.moneyness) {
                        let iv = (|| {
                            let layer = basis.with_strike(&inp, k)?;
                            let th = theta_and_coords(&layer, &inp.params, j, anchor);
                            Ok(iv_expansion_mixed(&layer, &inp.params, &th)?)
                        })();
                        out.push(point(k, t, x, anchor, iv));
                    }
                }
            },
            Method::Hermite => {
                let prep = match prep {
                    Prepared::Single { .. } => prepare(m, &c, spec, true)?,
                    mixed => mixed,
                };
                let Prepared::Mixed { inp, j } = prep else {
                    unreachable!("forced mixture")
                };
                let basis = HermiteBasis::new(&inp.params, order_for(&inp, j, spec.order)?)?;
                for (&k, &x) in strikes.iter().zip(&spec.moneyness) {
                    let r = (|| {
                        let layer = basis.with_strike(&inp, k)?;
                        let p = hermite_prices(&layer, &inp.params, j)?;
                        let kind = otm(k, p.future);
                        let price = if kind == OptionKind::Call { p.call } else { p.put };
                        Ok((invert(price, p.future, k, t, kind), p.future))
                    })();
                    out.push(flatten(k, t, x, anchor, r));
                }
            }
            Method::WeakApprox => match prep {
                Prepared::Single { proxy, gammas } => {
                    for (&k, &x) in strikes.iter().zip(&spec.moneyness) {
                        let r = (|| {
                            let p = proxy_prices(&proxy, &gammas, &c.with_strike(k))?;
                            let kind = otm(k, p.future);
                            let price = if kind == OptionKind::Call { p.call } else { p.put };
                            Ok((invert(price, p.future, k, t, kind), p.future))
                        })();
                        out.push(flatten(k, t, x, anchor, r));
                    }
                }
                Prepared::Mixed { inp, .. } => {
                    let opts = WeakOptions::default();
                    let f = weak_approx_price(&inp, 0.0, vix_mixed::Payoff::Future, opts)?.price;
                    for (&k, &x) in strikes.iter().zip(&spec.moneyness) {
                        let r = (|| {
                            let kind = otm(k, f);
                            let payoff = if kind == OptionKind::Call {
                                vix_mixed::Payoff::Call
                            } else {
                                vix_mixed::Payoff::Put
                            };
                            let price = weak_approx_price(&inp, k, payoff, opts)?.price;
                            Ok((invert(price, f, k, t, kind), f))
                        })();
                        out.push(flatten(k, t, x, anchor, r));
                    }
                }
            },
        }
    }
    Ok(out)
}

fn flatten(k: f64, t: f64, x: f64, anchor: f64, r: Result<((f64, String), f64), CliError>) -> SmilePoint {
    match r {
        Ok(((iv, flag), f)) => SmilePoint {
            k,
            t,
            log_moneyness: x,
            future: f,
            iv,
            std_err: None,
            flag,
        },
        Err(e) => point(k, t, x, anchor, Err(e)),
    }
}
