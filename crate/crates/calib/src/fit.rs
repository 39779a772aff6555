use serde::{Deserialize, Serialize};
use vix_mixed::Component;
use vix_model::{VixContract, DEFAULT_DELTA};
use vix_single::QuadSpec;

use crate::chain::{MarketChain, MarketSlice};
use crate::lm::{least_squares, LmOptions, Residuals};
use crate::model::{Bounds, Family, OrderPolicy, Params, SliceModel};
use crate::{CalibError, Result};

/// Everything that fixes a calibration run, echoed in the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibConfig {
    pub family: Family,
    /// Fixed kappa (exponential) or H (power law).
    pub decay: f64,
    pub delta: f64,
    pub bounds: Bounds,
    pub order: OrderPolicy,
    /// Expansion component for mixtures, 1 or 2; `None` picks the smaller sigma_P.
    pub component: Option<usize>,
    pub max_iter: usize,
    pub step_tol: f64,
    pub quad_nodes: usize,
}

impl CalibConfig {
    pub fn new(family: Family, decay: f64) -> Self {
        Self {
            family,
            decay,
            delta: DEFAULT_DELTA,
            bounds: Bounds::default(),
            order: OrderPolicy::default(),
            component: None,
            max_iter: 200,
            step_tol: 1e-8,
            quad_nodes: 120,
        }
    }

    fn quad(&self) -> QuadSpec {
        QuadSpec {
            t_nodes: self.quad_nodes,
            u_nodes: self.quad_nodes,
        }
    }

    fn component(&self) -> Result<Option<Component>> {
        match self.component {
            None => Ok(None),
            Some(j) => Component::from_number(j)
                .map(Some)
                .ok_or_else(|| CalibError::Config(format!("component must be 1 or 2, got {j}"))),
        }
    }

    pub fn slice_model(&self, params: &Params, t: f64, order: OrderPolicy) -> Result<SliceModel> {
        SliceModel::new(
            self.family,
            self.decay,
            params,
            VixContract::with_delta(t, self.delta, 0.0)?,
            order,
            self.component()?,
            self.quad(),
        )
    }
}

/// Calibrated parameters of one maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceResult {
    #[serde(rename = "T")]
    pub t: f64,
    pub future: f64,
    pub xi0: f64,
    pub params: Params,
    /// Root-mean-square IV misfit.
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Hermite order at the solution (mixtures only).
    pub order: Option<usize>,
    /// Set when the slice failed; the other fields then hold the starting point.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibResult {
    pub config: CalibConfig,
    pub slices: Vec<SliceResult>,
}

impl CalibResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable result")
    }

    /// Piecewise-flat forward variance (start, level) assembled from the slices.
    pub fn xi0_curve(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .slices
            .iter()
            .filter(|s| s.error.is_none())
            .map(|s| (s.t, s.xi0))
            .collect();
        if let Some(first) = out.first_mut() {
            first.0 = 0.0;
        }
        out
    }
}

/// xi0 whose model futures price equals the slice's.
pub fn fit_xi0(cfg: &CalibConfig, params: &Params, slice: &MarketSlice) -> Result<f64> {
    cfg.slice_model(params, slice.t, cfg.order)?.fit_xi0(slice.future, cfg.bounds.xi0)
}

/// Model IVs at the slice strikes, with xi0 fitted to the slice future.
pub fn model_ivs(model: &SliceModel, slice: &MarketSlice, xi_bounds: (f64, f64)) -> Result<(f64, Vec<f64>)> {
    let xi = model.fit_xi0(slice.future, xi_bounds)?;
    let ivs = slice
        .log_strikes()
        .iter()
        .map(|&k| model.iv(k, xi))
        .collect::<Result<Vec<_>>>()?;
    Ok((xi, ivs))
}

struct SliceProblem<'a> {
    cfg: &'a CalibConfig,
    slice: &'a MarketSlice,
}

impl Residuals for SliceProblem<'_> {
    type Ctx = OrderPolicy;
    type Error = CalibError;

    fn context(&self, x: &[f64]) -> Result<OrderPolicy> {
        if !self.cfg.family.is_mixed() {
            return Ok(self.cfg.order);
        }
        let p = Params::from_slice(self.cfg.family, x)?;
        let m = self.cfg.slice_model(&p, self.slice.t, self.cfg.order)?;
        Ok(OrderPolicy::Fixed(m.order.expect("mixed model has an order")))
    }

    fn eval(&self, x: &[f64], ctx: &OrderPolicy) -> Result<Vec<f64>> {
        let p = Params::from_slice(self.cfg.family, x)?;
        let m = self.cfg.slice_model(&p, self.slice.t, *ctx)?;
        let (_, ivs) = model_ivs(&m, self.slice, self.cfg.bounds.xi0)?;
        Ok(ivs.iter().zip(&self.slice.quotes).map(|(a, q)| a - q.iv).collect())
    }
}

/// Fit one maturity: least squares on IVs over the vol-of-variance parameters,
/// with xi0 re-fitted to the futures price at every evaluation.
pub fn calibrate_slice(cfg: &CalibConfig, slice: &MarketSlice, init: &Params) -> Result<SliceResult> {
    if slice.quotes.len() < 3 {
        return Err(CalibError::Data(format!(
            "slice T={} has {} quotes; at least 3 are needed",
            slice.t,
            slice.quotes.len()
        )));
    }
    if !init.matches(cfg.family) {
        return Err(CalibError::Config(format!("initial guess does not match family {}", cfg.family.name())));
    }
    let (lo, hi) = cfg.bounds.boxes(cfg.family);
    let x0 = init.to_vec();
    if x0.iter().zip(lo.iter().zip(&hi)).any(|(x, (a, b))| !(x >= a && x <= b)) {
        return Err(CalibError::Config(format!("initial guess {x0:?} outside bounds")));
    }
    let prob = SliceProblem { cfg, slice };
    let opts = LmOptions {
        max_iter: cfg.max_iter,
        step_tol: cfg.step_tol,
        ..LmOptions::default()
    };
    let rep = least_squares(&prob, &x0, &lo, &hi, opts)?;
    let params = Params::from_slice(cfg.family, &rep.x)?;
    let model = cfg.slice_model(&params, slice.t, cfg.order)?;
    let xi0 = model.fit_xi0(slice.future, cfg.bounds.xi0)?;
    if !rep.converged {
        log::warn!("slice T={}: no convergence after {} iterations", slice.t, rep.iterations);
    }
    Ok(SliceResult {
        t: slice.t,
        future: slice.future,
        xi0,
        params,
        rmse: (2.0 * rep.cost / rep.residuals.len() as f64).sqrt(),
        iterations: rep.iterations,
        converged: rep.converged,
        order: model.order,
        error: None,
    })
}

/// Calibrate maturities shortest first, each warm-started from the previous
/// solution. A failing slice is recorded with its error and skipped.
pub fn calibrate_term_structure(cfg: &CalibConfig, chain: &MarketChain, init: &Params) -> Result<CalibResult> {
    if chain.slices.is_empty() {
        return Err(CalibError::EmptyChain);
    }
    let mut start = *init;
    let mut slices = Vec::with_capacity(chain.slices.len());
    for s in &chain.slices {
        match calibrate_slice(cfg, s, &start) {
            Ok(r) => {
                start = r.params;
                slices.push(r);
            }
            Err(e) => slices.push(SliceResult {
                t: s.t,
                future: s.future,
                xi0: f64::NAN,
                params: start,
                rmse: f64::NAN,
                iterations: 0,
                converged: false,
                order: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(CalibResult {
        config: cfg.clone(),
        slices,
    })
}

/// Synthetic slice priced by the expansion itself, for round-trip checks.
pub fn synthetic_slice(cfg: &CalibConfig, params: &Params, xi0: f64, t: f64, log_moneyness: &[f64]) -> Result<MarketSlice> {
    let m = cfg.slice_model(params, t, cfg.order)?;
    let f = m.future(xi0);
    let quotes = log_moneyness
        .iter()
        .map(|&x| {
            let k = f.ln() + x;
            Ok(crate::chain::Quote {
                strike: k.exp(),
                iv: m.iv(k, xi0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarketSlice { t, future: f, quotes })
}
