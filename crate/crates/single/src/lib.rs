//! Single-kernel VIX pricing: log-normal proxy (mu_P, sigma_P), the gamma
//! corrections, corrected call/put/futures prices and the closed-form
//! implied-volatility expansion.

mod grid;
mod prices;
mod proxy;

pub use grid::QuadSpec;
pub use prices::{iv_expansion, proxy_prices, ProxyPrices};
pub use proxy::{
    gamma_coeffs, kernel_proxy, proxy_params, proxy_params_exponential_flat, GammaCoefficients, KernelIntegrals,
    ProxyParams,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SingleError {
    #[error(transparent)]
    Model(#[from] vix_model::ModelError),
    #[error(transparent)]
    Bs(#[from] vix_blackscholes::BsError),
    #[error(transparent)]
    Math(#[from] vix_mathcore::MathError),
    #[error("degenerate proxy: sigma_P = {0}")]
    Degenerate(f64),
}

pub type Result<T> = std::result::Result<T, SingleError>;

pub type ProxyParams64 = ProxyParams<f64>;
pub type GammaCoefficients64 = GammaCoefficients<f64>;
pub type ProxyPrices64 = ProxyPrices<f64>;
pub type ProxyParams32 = ProxyParams<f32>;
pub type GammaCoefficients32 = GammaCoefficients<f32>;
