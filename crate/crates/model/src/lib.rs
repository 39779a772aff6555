//! Kernels, forward-variance curves and model parameter containers.
//!
//! Time is in years. Variance levels are annualised decimals (0.24^2, not 576).

mod curve;
mod file;
mod kernel;

pub use curve::{mean_vix2, weight_pieces, xi_weight, ForwardVarianceCurve, VixContract, WeightPiece, DEFAULT_DELTA};
pub use file::{AnyModel, ModelFile};
pub use kernel::{KernelKind, KernelSpec};

use thiserror::Error;
use vix_mathcore::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel evaluated at t={t} >= u={u}")]
    KernelDomain { u: f64, t: f64 },
    #[error("curve does not cover [{from}, {to}]")]
    CurveDomain { from: f64, to: f64 },
    #[error("u={u} outside the VIX window [{from}, {to}]")]
    WindowDomain { u: f64, from: f64, to: f64 },
    #[error("model file: {0}")]
    File(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, PartialEq)]
pub struct SingleModel<T> {
    pub kernel: KernelSpec<T>,
    pub curve: ForwardVarianceCurve<T>,
}

impl<T: Scalar> SingleModel<T> {
    pub fn new(kernel: KernelSpec<T>, curve: ForwardVarianceCurve<T>) -> Result<Self> {
        kernel.validate()?;
        Ok(Self { kernel, curve })
    }
}

/// Two-component mixture with proportional kernels (same variant and decay).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedModel<T> {
    pub kernels: [KernelSpec<T>; 2],
    /// Weight of component 1; component 2 gets 1 - lambda.
    pub lambda: T,
    pub curve: ForwardVarianceCurve<T>,
}

impl<T: Scalar> MixedModel<T> {
    pub fn new(kernels: [KernelSpec<T>; 2], lambda: T, curve: ForwardVarianceCurve<T>) -> Result<Self> {
        kernels[0].validate()?;
        kernels[1].validate()?;
        if !kernels[0].same_family(&kernels[1]) {
            return Err(ModelError::InvalidParameter(
                "mixed kernels must share variant and decay parameter".into(),
            ));
        }
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(ModelError::InvalidParameter(format!("lambda={lambda} outside [0,1]")));
        }
        Ok(Self { kernels, lambda, curve })
    }

    pub fn weights(&self) -> [T; 2] {
        [self.lambda, T::one() - self.lambda]
    }

    pub fn component(&self, j: usize) -> SingleModel<T> {
        SingleModel {
            kernel: self.kernels[j],
            curve: self.curve.clone(),
        }
    }
}

pub type KernelSpec64 = KernelSpec<f64>;
pub type ForwardVarianceCurve64 = ForwardVarianceCurve<f64>;
pub type SingleModel64 = SingleModel<f64>;
pub type MixedModel64 = MixedModel<f64>;
pub type VixContract64 = VixContract<f64>;
pub type KernelSpec32 = KernelSpec<f32>;
pub type SingleModel32 = SingleModel<f32>;
