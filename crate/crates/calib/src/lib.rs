//! Calibration of VIX futures and smiles, one maturity at a time.
//!
//! For each slice, xi0 is pinned by the futures price and the vol-of-variance
//! parameters (omega or eta, plus lambda for mixtures) minimise the squared
//! implied-vol misfit of the closed-form expansion. The decay parameter is
//! held fixed. All levels are decimals: a VIX of 24 is 0.24.

mod chain;
mod fit;
mod lm;
mod model;

pub use chain::{load_chain, parse_chain, MarketChain, MarketSlice, Quote};
pub use fit::{
    calibrate_slice, calibrate_term_structure, fit_xi0, model_ivs, synthetic_slice, CalibConfig, CalibResult,
    SliceResult,
};
pub use lm::{least_squares, LmOptions, LmReport, Residuals};
pub use model::{Bounds, Family, OrderPolicy, Params, SliceModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibError {
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("empty chain")]
    EmptyChain,
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Config(String),
    #[error("futures level {future} unattainable: model range [{lo}, {hi}] over the xi0 bounds")]
    FuturesUnattainable { future: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Model(#[from] vix_model::ModelError),
    #[error(transparent)]
    Single(#[from] vix_single::SingleError),
    #[error(transparent)]
    Mixed(#[from] vix_mixed::MixedError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CalibError>;
