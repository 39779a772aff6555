//! Two-component (mixed) Bergomi-type VIX pricing.
//!
//! The mixture VIX^2 proxy is `h(Z) = lambda_1 e^{mu_1 + sigma_1 Z} + lambda_2 e^{mu_2 + sigma_2 Z}`
//! with a single standard normal `Z`, because both kernels share the same decay.
//! On top of the leading term this crate provides
//!
//! - the weak price approximation, with corrections from finite differences in mu,
//! - Hermite-series prices built from the weights of `g_j`,
//! - three implied-volatility approximations (Hermite, extended, moment-matched).
//!
//! Everything here is `f64`.

mod hermite;
mod iv;
mod leading;
mod proxy;
mod weak;

pub use hermite::{
    c_coeffs, hermite_prices, hermite_weights, optimal_order, order_mse, HermiteBasis, HermiteLayer, HermitePrices,
    MAX_ORDER,
};
pub use iv::{
    iv_expansion_extended, iv_expansion_mixed, moment_matched_iv, theta_and_coords, MomentMatch, ThetaChoice,
};
pub use leading::{leading_prices, LeadingPrices};
pub use proxy::{h_and_root, mixed_proxy, mixed_proxy_params, Component, JForm, MixedInputs, MixedProxyParams};
pub use weak::{weak_approx_price, Payoff, WeakOptions, WeakPrice};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixedError {
    #[error(transparent)]
    Model(#[from] vix_model::ModelError),
    #[error(transparent)]
    Single(#[from] vix_single::SingleError),
    #[error(transparent)]
    Bs(#[from] vix_blackscholes::BsError),
    #[error(transparent)]
    Math(#[from] vix_mathcore::MathError),
    #[error("h is constant: both components have zero variance")]
    ConstantH,
    #[error("component {0} has zero weight")]
    EmptyComponent(usize),
    #[error("degenerate component {j}: sigma_P = {sigma}")]
    DegenerateComponent { j: usize, sigma: f64 },
    #[error("Hermite order {order} too high: {reason}")]
    OrderTooHigh { order: usize, reason: String },
    #[error("vega {0} too small for the extended expansion")]
    VanishingVega(f64),
    #[error("moment matching infeasible: {0}")]
    MatchingInfeasible(String),
}

pub type Result<T> = std::result::Result<T, MixedError>;
