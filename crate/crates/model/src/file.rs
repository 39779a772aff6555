use serde::{Deserialize, Serialize};

use crate::{ForwardVarianceCurve, KernelSpec, MixedModel, ModelError, Result, SingleModel};

/// On-disk model description.
///
/// ```json
/// {"kind":"mixed_rbergomi","eta1":1.4,"eta2":0.7,"hurst":0.1,"lambda":0.3,"curve":[[0.0,0.0576]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFile {
    Bergomi {
        omega: f64,
        kappa: f64,
        curve: Vec<[f64; 2]>,
    },
    Rbergomi {
        eta: f64,
        hurst: f64,
        curve: Vec<[f64; 2]>,
    },
    MixedBergomi {
        omega1: f64,
        omega2: f64,
        kappa: f64,
        lambda: f64,
        curve: Vec<[f64; 2]>,
    },
    MixedRbergomi {
        eta1: f64,
        eta2: f64,
        hurst: f64,
        lambda: f64,
        curve: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Single(SingleModel<f64>),
    Mixed(MixedModel<f64>),
}

impl AnyModel {
    pub fn curve(&self) -> &ForwardVarianceCurve<f64> {
        match self {
            Self::Single(m) => &m.curve,
            Self::Mixed(m) => &m.curve,
        }
    }

    pub fn kernel_kind(&self) -> crate::KernelKind {
        match self {
            Self::Single(m) => m.kernel.kind(),
            Self::Mixed(m) => m.kernels[0].kind(),
        }
    }
}

fn curve_from(points: &[[f64; 2]]) -> Result<ForwardVarianceCurve<f64>> {
    ForwardVarianceCurve::new(points.iter().map(|p| (p[0], p[1])).collect())
}

fn curve_to(c: &ForwardVarianceCurve<f64>) -> Vec<[f64; 2]> {
    c.segments().iter().map(|&(t, x)| [t, x]).collect()
}

impl ModelFile {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| ModelError::File(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serialises")
    }

    pub fn to_model(&self) -> Result<AnyModel> {
        Ok(match self {
            Self::Bergomi { omega, kappa, curve } => {
                AnyModel::Single(SingleModel::new(KernelSpec::exponential(*omega, *kappa)?, curve_from(curve)?)?)
            }
            Self::Rbergomi { eta, hurst, curve } => {
                AnyModel::Single(SingleModel::new(KernelSpec::power_law(*eta, *hurst)?, curve_from(curve)?)?)
            }
            Self::MixedBergomi {
                omega1,
                omega2,
                kappa,
                lambda,
                curve,
            } => AnyModel::Mixed(MixedModel::new(
                [KernelSpec::exponential(*omega1, *kappa)?, KernelSpec::exponential(*omega2, *kappa)?],
                *lambda,
                curve_from(curve)?,
            )?),
            Self::MixedRbergomi {
                eta1,
                eta2,
                hurst,
                lambda,
                curve,
            } => AnyModel::Mixed(MixedModel::new(
                [KernelSpec::power_law(*eta1, *hurst)?, KernelSpec::power_law(*eta2, *hurst)?],
                *lambda,
                curve_from(curve)?,
            )?),
        })
    }

    pub fn from_model(m: &AnyModel) -> Self {
        match m {
            AnyModel::Single(s) => match s.kernel {
                KernelSpec::Exponential { omega, kappa } => Self::Bergomi {
                    omega,
                    kappa,
                    curve: curve_to(&s.curve),
                },
                KernelSpec::PowerLaw { eta, hurst } => Self::Rbergomi {
                    eta,
                    hurst,
                    curve: curve_to(&s.curve),
                },
            },
            AnyModel::Mixed(mm) => match (mm.kernels[0], mm.kernels[1]) {
                (KernelSpec::Exponential { omega: o1, kappa }, k2) => Self::MixedBergomi {
                    omega1: o1,
                    omega2: k2.scale(),
                    kappa,
                    lambda: mm.lambda,
                    curve: curve_to(&mm.curve),
                },
                (KernelSpec::PowerLaw { eta: e1, hurst }, k2) => Self::MixedRbergomi {
                    eta1: e1,
                    eta2: k2.scale(),
                    hurst,
                    lambda: mm.lambda,
                    curve: curve_to(&mm.curve),
                },
            },
        }
    }
}
