//! Reference ("ground truth") pricers for VIX futures and options.
//!
//! - [`quad_price_exponential`]: deterministic quadrature, exponential kernels.
//!   The VIX is a function of one Gaussian there.
//! - [`mc_price`] / [`mc_simulate`]: Monte Carlo over a discretised VIX window.
//!   Exact Cholesky factor for power-law kernels, rank-one for exponential.
//! - [`reference_smile`]: futures and implied vols on a strike/maturity grid,
//!   writable as CSV.

mod components;
mod mc;
mod quad;
mod smile;

pub use components::{components, Component};
pub use mc::{mc_price, mc_price_powerlaw, mc_simulate, McConfig, McEstimate, McSample};
pub use quad::{quad_price_exponential, QuadNodes};
pub use smile::{linspace, reference_smile, write_smile_csv, Engine, EngineChoice, SmileGrid, SmileRow, StrikeSpec};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Payoff {
    Call,
    Put,
    Future,
}

impl Payoff {
    #[inline]
    pub fn apply(self, vix: f64, strike: f64) -> f64 {
        match self {
            Payoff::Call => (vix - strike).max(0.0),
            Payoff::Put => (strike - vix).max(0.0),
            Payoff::Future => vix,
        }
    }
}

#[derive(Debug, Error)]
pub enum RefError {
    #[error("{0}")]
    WrongPricer(String),
    #[error("covariance not positive definite after jitter {jitter:e}")]
    Covariance { jitter: f64 },
    #[error("invalid Monte Carlo configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] vix_model::ModelError),
    #[error(transparent)]
    Math(#[from] vix_mathcore::MathError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RefError>;
