use std::io::Write;

use serde::Serialize;
use vix_blackscholes::{implied_vol, vega, BsError, BsInputs, OptionKind};
use vix_model::{AnyModel, KernelKind, VixContract, DEFAULT_DELTA};

use crate::mc::{mc_simulate, McConfig};
use crate::quad::{quad_price_exponential, QuadNodes};
use crate::{Payoff, RefError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Quadrature,
    #[serde(rename = "mc")]
    MonteCarlo,
}

/// Engine selection; `Auto` uses quadrature for exponential kernels and MC otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    #[default]
    Auto,
    Force(Engine),
}

impl EngineChoice {
    pub fn resolve(self, m: &AnyModel) -> Result<Engine> {
        let kind = m.kernel_kind();
        match self {
            EngineChoice::Auto => Ok(match kind {
                KernelKind::Exponential => Engine::Quadrature,
                KernelKind::PowerLaw => Engine::MonteCarlo,
            }),
            EngineChoice::Force(Engine::Quadrature) if kind == KernelKind::PowerLaw => Err(RefError::WrongPricer(
                "quadrature engine needs exponential kernels".into(),
            )),
            EngineChoice::Force(e) => Ok(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrikeSpec {
    /// k - ln F_ref.
    LogMoneyness(Vec<f64>),
    /// Absolute log-strikes.
    LogStrike(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmileGrid {
    pub maturities: Vec<f64>,
    pub strikes: StrikeSpec,
    pub delta: f64,
}

impl SmileGrid {
    /// 10 evenly spaced log-moneyness points in [-0.1, 0.4] at 1, 3 and 6 months.
    pub fn standard() -> Self {
        Self {
            maturities: vec![1.0 / 12.0, 0.25, 0.5],
            strikes: StrikeSpec::LogMoneyness(linspace(-0.1, 0.4, 10)),
            delta: DEFAULT_DELTA,
        }
    }

    fn validate(&self) -> Result<()> {
        let pts = match &self.strikes {
            StrikeSpec::LogMoneyness(v) | StrikeSpec::LogStrike(v) => v,
        };
        if self.maturities.is_empty() || pts.is_empty() {
            return Err(RefError::Config("empty smile grid".into()));
        }
        if pts.iter().chain(&self.maturities).any(|x| !x.is_finite()) {
            return Err(RefError::Config("non-finite grid value".into()));
        }
        Ok(())
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// One reference point. `iv_ref` is NaN when `flag` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmileRow {
    pub k: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "F_ref")]
    pub f_ref: f64,
    pub iv_ref: f64,
    /// Implied-vol standard error (price error over vega); MC only.
    pub std_err: Option<f64>,
    pub engine: Engine,
    pub flag: String,
}

impl SmileRow {
    pub fn log_moneyness(&self) -> f64 {
        self.k - self.f_ref.ln()
    }

    pub fn is_flagged(&self) -> bool {
        !self.flag.is_empty()
    }
}

fn otm(k: f64, lnf: f64) -> (Payoff, OptionKind) {
    if k >= lnf {
        (Payoff::Call, OptionKind::Call)
    } else {
        (Payoff::Put, OptionKind::Put)
    }
}

fn row(k: f64, t: f64, f: f64, price: f64, se: Option<f64>, kind: OptionKind, engine: Engine) -> Result<SmileRow> {
    let lnf = f.ln();
    let (iv, flag) = match implied_vol(price, lnf, k, t, kind) {
        Ok(v) => (v, String::new()),
        Err(e @ BsError::Arbitrage { .. }) => (f64::NAN, e.to_string()),
        Err(e) => (f64::NAN, format!("implied vol failed: {e}")),
    };
    let std_err = match se {
        Some(s) if iv.is_finite() => match vega(&BsInputs::new(lnf, k, iv, t)) {
            Ok(v) if v > 0.0 => Some(s / v),
            _ => Some(f64::NAN),
        },
        Some(_) => Some(f64::NAN),
        None => None,
    };
    Ok(SmileRow {
        k,
        t,
        f_ref: f,
        iv_ref: iv,
        std_err,
        engine,
        flag,
    })
}

/// Reference futures and implied vols over `grid`, maturity-major.
///
/// Each option is priced on its out-of-the-money side and inverted with
/// ln F_ref as the log-forward. Prices outside the no-arbitrage band are
/// flagged rather than failing the run.
pub fn reference_smile(
    m: &AnyModel,
    grid: &SmileGrid,
    engine: EngineChoice,
    nodes: QuadNodes,
    cfg: &McConfig,
) -> Result<Vec<SmileRow>> {
    grid.validate()?;
    let engine = engine.resolve(m)?;
    let mut rows = Vec::new();
    for &t in &grid.maturities {
        let c = VixContract::with_delta(t, grid.delta, 0.0)?;
        match engine {
            Engine::Quadrature => {
                let f = quad_price_exponential(m, &c, Payoff::Future, nodes)?;
                for k in strikes(&grid.strikes, f) {
                    let (payoff, kind) = otm(k, f.ln());
                    let p = quad_price_exponential(m, &c.with_strike(k), payoff, nodes)?;
                    rows.push(row(k, t, f, p, None, kind, engine)?);
                }
            }
            Engine::MonteCarlo => {
                let sample = mc_simulate(m, &c, cfg)?;
                let f = sample.estimate(Payoff::Future, 0.0).price;
                for k in strikes(&grid.strikes, f) {
                    let (payoff, kind) = otm(k, f.ln());
                    let est = sample.estimate(payoff, k);
                    rows.push(row(k, t, f, est.price, Some(est.std_error), kind, engine)?);
                }
            }
        }
    }
    Ok(rows)
}

fn strikes(spec: &StrikeSpec, f: f64) -> Vec<f64> {
    match spec {
        StrikeSpec::LogMoneyness(v) => v.iter().map(|x| f.ln() + x).collect(),
        StrikeSpec::LogStrike(v) => v.clone(),
    }
}

/// Write rows as CSV with header k,T,F_ref,iv_ref,std_err,engine,flag.
pub fn write_smile_csv<W: Write>(rows: &[SmileRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
