//! Numerical building blocks shared by the pricing crates.
//!
//! Everything here is generic over [`Scalar`], implemented for `f32` and `f64`.

mod error;
mod quadrature;
mod roots;
mod scalar;
mod special;

pub use error::MathError;
pub use quadrature::{gauss_hermite_prob, gauss_legendre, RuleKind, QuadratureRule};
pub use roots::{expand_bracket, find_root, find_root_default, DEFAULT_TOL, MAX_ITER};
pub use scalar::Scalar;
pub use special::{
    hermite_poly, hermite_polys, log_add_exp, norm_cdf, norm_pdf, norm_pdf_cdf, HERMITE_MAX_ORDER,
};

pub type Result<T> = std::result::Result<T, MathError>;

pub type QuadratureRule64 = QuadratureRule<f64>;
pub type QuadratureRule32 = QuadratureRule<f32>;
